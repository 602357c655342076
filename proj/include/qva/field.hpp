#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "module_vector.hpp"

namespace qva {

struct Window {
    std::vector<std::pair<int, int>> ranges;

    Window() = default;
    Window(std::initializer_list<std::pair<int, int>> r) : ranges(r) {
        for (auto& [lo, hi] : ranges)
            if (lo > hi) throw ConfigError("window lo > hi");
    }
    static Window cube(int dims, int lo, int hi) {
        Window w;
        if (lo > hi) throw ConfigError("window lo > hi");
        w.ranges.assign(dims, {lo, hi});
        return w;
    }
    size_t dims() const { return ranges.size(); }
    std::string str() const {
        std::string s;
        for (auto& [lo, hi] : ranges) {
            if (!s.empty()) s += "x";
            s += "[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
        }
        return s;
    }
};

// A field on a module: mode action plus a lower-truncation bound.
struct FieldOracle {
    std::function<ModuleVector(int, const ModuleVector&, int)> apply;
    // modes m >= bound(w, N) annihilate w mod h^N
    std::function<int(const ModuleVector&, int)> bound;
    std::string label;

    ModuleVector operator()(int m, const ModuleVector& w) const { return apply(m, w, w.order()); }
};

inline FieldOracle identity_field() {
    return {[](int m, const ModuleVector& w, int N) { return m == -1 ? w.truncated(N) : ModuleVector(N); },
            [](const ModuleVector&, int) { return 0; }, "1"};
}

inline FieldOracle zero_field(std::string label = "0") {
    return {[](int, const ModuleVector&, int N) { return ModuleVector(N); }, [](const ModuleVector&, int) { return INT32_MIN / 4; },
            std::move(label)};
}

// Apply a basis-wise map linearly, scaling by the h-graded coefficients.
template <class F>
ModuleVector apply_linear(const ModuleVector& w, int N, F&& on_monomial) {
    ModuleVector r(N);
    for (auto& [m, c] : w.terms()) {
        ModuleVector part = on_monomial(m);
        r.add_scaled(part, c.order() == N ? c : c.truncated(N));
    }
    return r;
}

} // namespace qva
