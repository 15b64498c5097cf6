#pragma once

#include "mdag/graph.hpp"
#include "mdag/identify.hpp"
#include "mdag/scm.hpp"

namespace mdag {
namespace fixtures {

// The four small taxonomy graphs: outcome Y (partial, indicator M_Y),
// treatment A and age X fully observed.
//   (a) no causes of missingness          → MCAR
//   (b) A → M_Y                           → MAR
//   (c) Y → M_Y                           → MNAR (self-masking)
//   (d) latent U → M_Y and U → A          → MNAR
MDag fig1(char variant);

// Two-time-point longitudinal study with attrition: treatments A1, A2,
// side effects X1, X2 (partial), outcomes Y1, Y2 (partial); X1 causes
// missingness in X1 and Y1, X2 in X2 and Y2.
MDag fig2();

enum class StudyVariant { Main, Alt1, Alt2 };

StudyVariant study_variant_from_name(const std::string& s);
const char* study_variant_name(StudyVariant v);

// Longitudinal pharmacology m-DAG over weeks {0, 6, 36, 48, 60, 84}.
// The default form follows the simulation data-generating process: a
// single measured socio-economic proxy SES_0 drives missed visits, and
// unmeasured technical issues TI_t drive the indicators.
//   Main: missed visits have no substantive causes (closed mechanism).
//   Alt1: adds VL_t → MV_t (health status causes missed visits).
//   Alt2: adds SES_0 → MEMS_t, pulling SES_0 into the substantive graph.
MDag chapas_mdag(StudyVariant v);

// Figure-style variant with the three distinct auxiliary causes of missed
// visits (BMQ and SES measured, BHV unmeasured) instead of the collapsed
// proxy. Used by the taxonomy fixtures.
MDag chapas_mdag_full(StudyVariant v);

// The full data-generating process for the simulation studies, matching
// chapas_mdag(v).
ScmSpec chapas_scm(StudyVariant v);

// P(VL_36 = 1 ; do(EFV_6 = a, EFV_36 = a)) with the weight/adherence
// adjustment history.
CausalQuery theta36();
// P(VL_84 = 1 ; do(EFV_t = a for t in {6, 36, 48, 60, 84})).
CausalQuery theta84();

const std::vector<int>& study_weeks();  // {0, 6, 36, 48, 60, 84}

// Writes every fixture (graphs, queries, scm specs) as JSON files.
void write_fixture_files(const std::string& directory);

}  // namespace fixtures
}  // namespace mdag
