#pragma once

#include <stdexcept>
#include <string>

namespace mdag {

// Base class for all library errors; `code()` is a stable machine-readable tag.
class MdagError : public std::runtime_error {
public:
    MdagError(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define MDAG_DEFINE_ERROR(NAME)                                          \
    class NAME : public MdagError {                                      \
    public:                                                              \
        explicit NAME(const std::string& what) : MdagError(#NAME, what) {} \
    }

MDAG_DEFINE_ERROR(CycleDetected);
MDAG_DEFINE_ERROR(IllegalMEdge);
MDAG_DEFINE_ERROR(OrphanIndicator);
MDAG_DEFINE_ERROR(UnknownNode);
MDAG_DEFINE_ERROR(NotClosed);
MDAG_DEFINE_ERROR(PositivityViolation);
MDAG_DEFINE_ERROR(UnboundVariable);
MDAG_DEFINE_ERROR(NotIdentifiedInput);
MDAG_DEFINE_ERROR(NotRecoverableInput);
MDAG_DEFINE_ERROR(BackdoorBlockedViolation);
MDAG_DEFINE_ERROR(FormulaDomainError);
MDAG_DEFINE_ERROR(FormulaParseError);
MDAG_DEFINE_ERROR(Separation);
MDAG_DEFINE_ERROR(RankDeficient);
MDAG_DEFINE_ERROR(InsufficientRows);
MDAG_DEFINE_ERROR(GridMismatch);
MDAG_DEFINE_ERROR(InvalidSpec);

#undef MDAG_DEFINE_ERROR

}  // namespace mdag
