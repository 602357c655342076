#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "field.hpp"

namespace qva {

struct Counterexample {
    std::vector<int> exponents;
    int hbar = 0;
    std::string probe;
    std::string lhs, rhs;
};

struct CheckReport {
    std::string claim;
    std::string window;
    int hbar_order = 1;
    int probes = 0;
    bool pass = true;
    bool experimental = false;
    std::optional<Counterexample> counterexample;
    std::vector<std::string> notes;

    std::string status() const { return pass ? "pass" : "fail"; }
};

inline nlohmann::ordered_json to_json(const CheckReport& r) {
    nlohmann::ordered_json j;
    j["claim"] = r.claim;
    j["window"] = r.window;
    j["hbar_order"] = r.hbar_order;
    j["probes"] = r.probes;
    j["status"] = r.status();
    if (r.experimental) j["experimental"] = true;
    if (r.counterexample) {
        auto& c = *r.counterexample;
        j["counterexample"] = {{"exponents", c.exponents}, {"hbar", c.hbar}, {"probe", c.probe}, {"lhs", c.lhs}, {"rhs", c.rhs}};
    }
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

// Records the first disagreement between two sides of a claimed identity.
class Comparer {
public:
    explicit Comparer(CheckReport& r) : r_(r) {}

    bool operator()(const std::vector<int>& exps, const std::string& probe, const ModuleVector& lhs, const ModuleVector& rhs) {
        if (lhs == rhs) return true;
        int N = std::max(lhs.order(), rhs.order());
        for (int k = 0; k < N; ++k) {
            auto l = lhs.hpart(k), rr = rhs.hpart(k);
            if (l == rr) continue;
            fail(exps, k, probe, l.str(), rr.str());
            return false;
        }
        fail(exps, 0, probe, lhs.str(), rhs.str());
        return false;
    }

    void fail(const std::vector<int>& exps, int k, const std::string& probe, std::string lhs, std::string rhs) {
        if (!r_.pass) return;
        r_.pass = false;
        r_.counterexample = Counterexample{exps, k, probe, std::move(lhs), std::move(rhs)};
    }

private:
    CheckReport& r_;
};

template <class F>
void for_each_point(const Window& w, F&& f) {
    std::vector<int> p(w.dims());
    std::function<bool(size_t)> rec = [&](size_t d) -> bool {
        if (d == w.dims()) return f(const_cast<const std::vector<int>&>(p));
        for (int e = w.ranges[d].first; e <= w.ranges[d].second; ++e) {
            p[d] = e;
            if (!rec(d + 1)) return false;
        }
        return true;
    };
    rec(0);
}

} // namespace qva
