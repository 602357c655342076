#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "module_vector.hpp"

namespace qva {

class QMatrix {
public:
    QMatrix() = default;
    explicit QMatrix(std::vector<std::vector<Rational>> q) : q_(std::move(q)) {
        size_t l = q_.size();
        if (l == 0) throw ConfigError("Q matrix must be nonempty");
        for (size_t i = 0; i < l; ++i) {
            if (q_[i].size() != l) throw ConfigError("Q matrix row " + std::to_string(i + 1) + " has wrong length");
            for (size_t j = 0; j < l; ++j)
                if (q_[i][j].is_zero())
                    throw ConfigError("Q matrix entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") is zero");
        }
        for (size_t i = 0; i < l; ++i)
            for (size_t j = 0; j < l; ++j)
                if (q_[i][j] * q_[j][i] != Rational(1))
                    throw ConfigError("Q matrix entries (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                      ") and transpose are not reciprocal");
    }
    static QMatrix scalar(const Rational& q) { return QMatrix({{q}}); }

    int size() const { return static_cast<int>(q_.size()); }
    // 1-based
    const Rational& operator()(int i, int j) const { return q_.at(i - 1).at(j - 1); }

private:
    std::vector<std::vector<Rational>> q_;
};

using RVec = std::map<Monomial, Rational>;

inline void radd(RVec& v, const Monomial& m, const Rational& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = v.try_emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second.is_zero()) v.erase(it);
    }
}

inline ModuleVector to_module(const RVec& v, int N) {
    ModuleVector r(N);
    for (auto& [m, c] : v) r.add(m, TruncScalar(c, N));
    return r;
}

// Zamolodchikov-Faddeev algebra A_Q acting on its vacuum module V_Q.
class ZFAlgebra {
public:
    explicit ZFAlgebra(QMatrix q) : q_(std::move(q)), cache_(std::make_shared<Cache>()) {}

    const QMatrix& q() const { return q_; }
    int rank() const { return q_.size(); }

    static bool annihilator(const Mode& z) { return z.degree >= 0; }
    // rewriting order: creation modes by canonical key, annihilators after everything
    static auto rank_key(const Mode& z) { return std::tuple(annihilator(z), z.index, z.species, z.degree); }

    bool square_zero(const Mode& z) const { return q_(z.index, z.index) == Rational(-1); }

    // a b = s * b a + c * (a, b removed)
    std::pair<Rational, Rational> exchange(const Mode& a, const Mode& b) const {
        check(a);
        check(b);
        if (a.species == b.species) return {q_(a.index, b.index), Rational()};
        bool pair = a.index == b.index && a.degree + b.degree + 1 == 0;
        if (a.species == 'X') return {q_(b.index, a.index), pair ? Rational(1) : Rational()};
        // Y_j X_i = q_ij X_i Y_j - q_ij delta
        Rational s = q_(b.index, a.index);
        return {s, pair ? -s : Rational()};
    }

    RVec apply_mono(const Mode& m, const Monomial& w) const {
        {
            std::lock_guard<std::mutex> lock(cache_->mu);
            auto it = cache_->memo.find({m, w});
            if (it != cache_->memo.end()) return it->second;
        }
        RVec r = straighten(m, w);
        std::lock_guard<std::mutex> lock(cache_->mu);
        cache_->memo.emplace(std::pair(m, w), r);
        return r;
    }

    ModuleVector apply_mode(const Mode& m, const ModuleVector& v) const {
        int N = v.order();
        return apply_linear(v, N, [&](const Monomial& w) { return to_module(apply_mono(m, w), N); });
    }

    RVec apply_rvec(const Mode& m, const RVec& v) const {
        RVec r;
        for (auto& [w, c] : v)
            for (auto& [w2, c2] : apply_mono(m, w)) radd(r, w2, c * c2);
        return r;
    }

    // Normal form of a word of modes applied to the vacuum, by single-step rewriting.
    // leftmost = true rewrites the leftmost reducible spot first.
    RVec rewrite_word(const std::vector<Mode>& word, bool leftmost) const {
        using Word = std::vector<Mode>;
        std::map<Word, Rational> pending{{word, Rational(1)}};
        RVec done;
        while (!pending.empty()) {
            auto node = pending.extract(pending.begin());
            const Word& w = node.key();
            Rational c = node.mapped();
            if (c.is_zero()) continue;
            int spot = find_spot(w, leftmost);
            if (spot < 0) {
                radd(done, Monomial(w.begin(), w.end()), c);
                continue;
            }
            if (spot == static_cast<int>(w.size()) - 1 && !is_pair_spot(w, spot)) continue; // annihilator at the vacuum
            const Mode &a = w[spot], &b = w[spot + 1];
            if (a == b && square_zero(a)) continue;
            auto [s, k] = exchange(a, b);
            Word sw = w;
            std::swap(sw[spot], sw[spot + 1]);
            add_word(pending, sw, c * s);
            if (!k.is_zero()) {
                Word cw;
                for (int i = 0; i < static_cast<int>(w.size()); ++i)
                    if (i != spot && i != spot + 1) cw.push_back(w[i]);
                add_word(pending, cw, c * k);
            }
        }
        return done;
    }

    // Composition of apply_mono from the right.
    RVec apply_word(const std::vector<Mode>& word) const {
        RVec v{{Monomial{}, Rational(1)}};
        for (auto it = word.rbegin(); it != word.rend(); ++it) v = apply_rvec(*it, v);
        return v;
    }

    // All normal monomials of weight <= depth, ordered by weight then lexicographically.
    std::vector<Monomial> basis(int depth) const {
        std::vector<Mode> alphabet;
        for (int i = 1; i <= rank(); ++i)
            for (char s : {'X', 'Y'})
                for (int d = -1; d >= -depth; --d) alphabet.push_back({s, i, d});
        std::sort(alphabet.begin(), alphabet.end());
        std::vector<Monomial> out;
        Monomial cur;
        std::function<void(size_t, int)> rec = [&](size_t from, int budget) {
            out.push_back(cur);
            for (size_t a = from; a < alphabet.size(); ++a) {
                int w = -alphabet[a].degree;
                if (w > budget) continue;
                if (!cur.empty() && cur.back() == alphabet[a] && square_zero(alphabet[a])) continue;
                cur.push_back(alphabet[a]);
                rec(a, budget - w);
                cur.pop_back();
            }
        };
        rec(0, depth);
        std::stable_sort(out.begin(), out.end(), [](const Monomial& x, const Monomial& y) {
            int wx = weight(x), wy = weight(y);
            return wx != wy ? wx < wy : x < y;
        });
        return out;
    }

    // D X_n = X_n D - n X_{n-1}, D 1 = 0
    ModuleVector translate(const ModuleVector& v) const {
        int N = v.order();
        return apply_linear(v, N, [&](const Monomial& w) {
            RVec acc;
            for (size_t i = 0; i < w.size(); ++i) {
                std::vector<Mode> word(w.begin(), w.end());
                Rational c(-word[i].degree);
                word[i].degree -= 1;
                for (auto& [m, c2] : apply_word(word)) radd(acc, m, c * c2);
            }
            return to_module(acc, N);
        });
    }

    FieldOracle generator_field(char species, int i) const {
        if (i < 1 || i > rank()) throw ConfigError("generator index out of range");
        ZFAlgebra self = *this;
        Mode proto{species, i, 0};
        return {[self, proto](int n, const ModuleVector& w, int N) {
                    Mode z = proto;
                    z.degree = n;
                    return self.apply_mode(z, w.truncated(N));
                },
                // modes of degree >= weight(w) pass every creation mode without contracting
                [](const ModuleVector& w, int) { return w.depth(); },
                std::string(1, species) + std::to_string(i)};
    }

private:
    struct Cache {
        std::mutex mu;
        std::map<std::pair<Mode, Monomial>, RVec> memo;
    };

    void check(const Mode& z) const {
        if (z.index < 1 || z.index > rank() || (z.species != 'X' && z.species != 'Y'))
            throw std::invalid_argument("bad mode symbol " + z.str());
    }

    RVec straighten(const Mode& m, const Monomial& w) const {
        check(m);
        RVec r;
        if (w.empty()) {
            if (!annihilator(m)) r.emplace(Monomial{m}, Rational(1));
            return r;
        }
        const Mode& z = w.front();
        if (!annihilator(m) && rank_key(m) <= rank_key(z)) {
            if (m == z && square_zero(m)) return r;
            Monomial out;
            out.reserve(w.size() + 1);
            out.push_back(m);
            out.insert(out.end(), w.begin(), w.end());
            r.emplace(std::move(out), Rational(1));
            return r;
        }
        auto [s, k] = exchange(m, z);
        Monomial rest(w.begin() + 1, w.end());
        if (!k.is_zero()) radd(r, rest, k);
        if (!s.is_zero())
            for (auto& [v, c] : apply_mono(m, rest))
                for (auto& [v2, c2] : apply_mono(z, v)) radd(r, v2, s * c * c2);
        return r;
    }

    bool is_pair_spot(const std::vector<Mode>& w, int i) const { return i + 1 < static_cast<int>(w.size()); }

    int find_spot(const std::vector<Mode>& w, bool leftmost) const {
        int n = static_cast<int>(w.size());
        auto reducible = [&](int i) {
            if (i == n - 1) return annihilator(w[i]);
            if (rank_key(w[i]) > rank_key(w[i + 1])) return true;
            return w[i] == w[i + 1] && square_zero(w[i]);
        };
        if (leftmost) {
            for (int i = 0; i < n; ++i)
                if (reducible(i)) return i;
        } else {
            for (int i = n - 1; i >= 0; --i)
                if (reducible(i)) return i;
        }
        return -1;
    }

    static void add_word(std::map<std::vector<Mode>, Rational>& p, const std::vector<Mode>& w, const Rational& c) {
        if (c.is_zero()) return;
        auto [it, fresh] = p.try_emplace(w, c);
        if (!fresh) it->second += c;
    }

    QMatrix q_;
    std::shared_ptr<Cache> cache_;
};

} // namespace qva
