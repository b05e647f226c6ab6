#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kps/errors.hpp"

namespace kps {

enum class symbol_kind {
    coordinate,    ///< chart coordinate; differentiable
    parameter,     ///< member of the coefficient field Q(parameters); differentiable
    free_function, ///< opaque lambda symbol; arithmetic only, never differentiated
    aux,           ///< synthetic variable (localization inverse, radical test variable)
};

struct symbol_info {
    std::string name;    ///< canonical name, matches [A-Za-z_][A-Za-z0-9_]*
    std::string display; ///< name used when printing (direction aliases applied)
    symbol_kind kind = symbol_kind::coordinate;

    symbol_info() = default;
    symbol_info(std::string n, symbol_kind k) : name(n), display(std::move(n)), kind(k) {}
    symbol_info(std::string n, std::string disp, symbol_kind k)
        : name(std::move(n)), display(std::move(disp)), kind(k) {}
};

/// Immutable, append-only symbol table.  Extending an environment yields a
/// child whose symbol list has the parent's as a prefix, so polynomials built
/// against the parent remain valid against the child (monomial exponent
/// vectors are implicitly zero-padded).
class SymbolEnv {
public:
    static std::shared_ptr<const SymbolEnv> create(std::vector<symbol_info> symbols) {
        return std::shared_ptr<const SymbolEnv>(new SymbolEnv(std::move(symbols)));
    }

    std::shared_ptr<const SymbolEnv> extended(std::vector<symbol_info> more) const {
        std::vector<symbol_info> all = symbols_;
        for (auto& s : more) all.push_back(std::move(s));
        return create(std::move(all));
    }

    std::size_t size() const { return symbols_.size(); }
    const symbol_info& at(std::size_t i) const { return symbols_.at(i); }

    /// Index of a symbol by canonical name or registered input alias; -1 if absent.
    int index_of(const std::string& name) const {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? -1 : it->second;
    }

    int require(const std::string& name) const {
        int i = index_of(name);
        if (i < 0) throw symbol_error("unknown symbol '" + name + "'");
        return i;
    }

    bool has(const std::string& name) const { return index_of(name) >= 0; }

    /// True when this environment's symbol list is a prefix of other's (or equal).
    bool is_prefix_of(const SymbolEnv& other) const {
        if (symbols_.size() > other.symbols_.size()) return false;
        for (std::size_t i = 0; i < symbols_.size(); ++i)
            if (symbols_[i].name != other.symbols_[i].name) return false;
        return true;
    }

private:
    explicit SymbolEnv(std::vector<symbol_info> symbols) : symbols_(std::move(symbols)) {
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            const auto& s = symbols_[i];
            if (!by_name_.emplace(s.name, int(i)).second)
                throw symbol_error("duplicate symbol '" + s.name + "'");
            if (s.display != s.name && !by_name_.emplace(s.display, int(i)).second)
                throw symbol_error("alias '" + s.display + "' collides with an existing symbol");
        }
    }

    std::vector<symbol_info> symbols_;
    std::map<std::string, int> by_name_;
};

using EnvPtr = std::shared_ptr<const SymbolEnv>;

/// The deeper of two prefix-compatible environments; rejects unrelated ones.
inline EnvPtr common_env(const EnvPtr& a, const EnvPtr& b) {
    if (!a) return b;
    if (!b) return a;
    if (a == b) return a;
    if (a->is_prefix_of(*b)) return b;
    if (b->is_prefix_of(*a)) return a;
    throw symbol_error("expressions belong to unrelated symbol environments");
}

} // namespace kps
