#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>

namespace gyrolim {

// Small multivariate polynomial (up to 4 variables, exponents stored per
// term). Enough structure for the heat-semigroup expansion on polynomials.
class Polynomial {
public:
    using Exponents = std::array<int, 4>;

    explicit Polynomial(int num_vars) : nv_(num_vars) {
        if (num_vars < 1 || num_vars > 4)
            throw std::invalid_argument("Polynomial: supports 1..4 variables");
    }

    int num_vars() const { return nv_; }
    const std::map<Exponents, double>& terms() const { return terms_; }

    void add_term(Exponents e, double coeff) {
        for (int k = nv_; k < 4; ++k)
            if (e[k] != 0) throw std::invalid_argument("Polynomial: exponent on unused variable");
        if (coeff == 0.0) return;
        auto [it, fresh] = terms_.try_emplace(e, 0.0);
        it->second += coeff;
        if (it->second == 0.0) terms_.erase(it);
    }

    int degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2] + e[3]);
        return d;
    }

    Polynomial laplacian() const {
        Polynomial out(nv_);
        for (const auto& [e, c] : terms_)
            for (int k = 0; k < nv_; ++k)
                if (e[k] >= 2) {
                    Exponents d = e;
                    d[k] -= 2;
                    out.add_term(d, c * e[k] * (e[k] - 1));
                }
        return out;
    }

    double evaluate(const std::array<double, 4>& x) const {
        double s = 0.0;
        for (const auto& [e, c] : terms_) {
            double t = c;
            for (int k = 0; k < nv_; ++k)
                for (int r = 0; r < e[k]; ++r) t *= x[k];
            s += t;
        }
        return s;
    }

    Polynomial& operator+=(const Polynomial& o) {
        if (o.nv_ != nv_) throw std::invalid_argument("Polynomial: mixed variable counts");
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }

    Polynomial scaled(double s) const {
        Polynomial out(nv_);
        for (const auto& [e, c] : terms_) out.add_term(e, c * s);
        return out;
    }

    bool operator==(const Polynomial& o) const { return nv_ == o.nv_ && terms_ == o.terms_; }

private:
    int nv_;
    std::map<Exponents, double> terms_;
};

// G_{hbar/2} * g = sum_{n <= deg/2} (hbar^n / (4^n n!)) Lap^n g, exact on
// polynomials of degree up to 6
inline Polynomial heat_poly_expansion(const Polynomial& g, double hbar) {
    if (g.degree() > 6)
        throw std::invalid_argument("heat_poly_expansion: degree " + std::to_string(g.degree()) +
                                    " exceeds the supported maximum 6");
    Polynomial out = g;
    Polynomial lap = g;
    double factor = 1.0;
    for (int n = 1; 2 * n <= 6; ++n) {
        lap = lap.laplacian();
        if (lap.terms().empty()) break;
        factor *= hbar / (4.0 * n);
        out += lap.scaled(factor);
    }
    return out;
}

} // namespace gyrolim
