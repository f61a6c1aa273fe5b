#pragma once

#include <cnlasp/asp.h>
#include <cnlasp/cnl.h>

#include <stdexcept>
#include <string>
#include <vector>

namespace cnlasp::codegen {

class CompileError : public std::runtime_error {
public:
    enum class Kind { UnboundVariable, ArityMismatch };

    CompileError(Kind kind, std::size_t proposition, std::string detail, std::string message);

    [[nodiscard]] Kind               kind() const { return kind_; }
    [[nodiscard]] std::size_t        proposition() const { return proposition_; }
    /// Variable name for UnboundVariable, entity name for ArityMismatch.
    [[nodiscard]] const std::string& detail() const { return detail_; }

private:
    Kind        kind_;
    std::size_t proposition_;
    std::string detail_;
};

std::string_view toString(CompileError::Kind k);

/// Atom for `ref` under `symbols`: key attributes then value attributes,
/// unbound positions become "_".
asp::Atom atomFor(const cnl::EntityRef& ref, const cnl::SymbolTable& symbols, std::size_t proposition = 0);

std::vector<asp::Rule> compileSentence(const cnl::Proposition& p, const cnl::SymbolTable& symbols);

/// Concatenation of compileSentence over the document's propositions.
asp::Program compile(const cnl::Document& doc);

}  // namespace cnlasp::codegen
