#include "linprog.hpp"

#include <cstddef>
#include <limits>
#include <utility>

#include "swgeo/core.hpp"

namespace swgeo::lp {

namespace {

constexpr double kEps = 1e-12;

// Tableau rows 0..m-1 are constraints, row m the objective, row m+1 the
// phase-one objective. Column n is the auxiliary variable, n+1 the rhs.
// Nonbasic index -1 marks the auxiliary variable.
class Tableau {
public:
    Tableau(const std::vector<std::vector<double>>& A, const std::vector<double>& b, const std::vector<double>& c)
        : m_(b.size()), n_(c.size()), basis_(m_), nonbasis_(n_ + 1), t_(m_ + 2, std::vector<double>(n_ + 2, 0.0)) {
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) t_[i][j] = A[i][j];
            basis_[i] = static_cast<long>(n_ + i);
            t_[i][n_] = -1.0;
            t_[i][n_ + 1] = b[i];
        }
        for (std::size_t j = 0; j < n_; ++j) {
            nonbasis_[j] = static_cast<long>(j);
            t_[m_][j] = -c[j];
        }
        nonbasis_[n_] = -1;
        t_[m_ + 1][n_] = 1.0;
    }

    Solution solve() {
        Solution out;
        std::size_t r = 0;
        for (std::size_t i = 1; i < m_; ++i)
            if (t_[i][n_ + 1] < t_[r][n_ + 1]) r = i;
        if (m_ > 0 && t_[r][n_ + 1] < -kEps) {
            pivot(r, n_);
            if (!run(true) || t_[m_ + 1][n_ + 1] < -1e-9) return out;
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] == -1) {
                    std::size_t s = 0;
                    for (std::size_t j = 1; j <= n_; ++j)
                        if (t_[i][j] < t_[i][s] || (t_[i][j] == t_[i][s] && nonbasis_[j] < nonbasis_[s])) s = j;
                    pivot(i, s);
                }
        }
        if (!run(false)) {
            out.status = Status::unbounded;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        out.status = Status::optimal;
        out.x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0 && basis_[i] < static_cast<long>(n_)) out.x[static_cast<std::size_t>(basis_[i])] = t_[i][n_ + 1];
        out.value = t_[m_][n_ + 1];
        return out;
    }

private:
    void pivot(std::size_t r, std::size_t s) {
        const double inv = 1.0 / t_[r][s];
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i == r || t_[i][s] == 0.0) continue;
            const double f = t_[i][s] * inv;
            for (std::size_t j = 0; j < n_ + 2; ++j)
                if (j != s) t_[i][j] -= t_[r][j] * f;
            t_[i][s] = -f;
        }
        for (std::size_t j = 0; j < n_ + 2; ++j)
            if (j != s) t_[r][j] *= inv;
        t_[r][s] = inv;
        std::swap(basis_[r], nonbasis_[s]);
    }

    bool run(bool phase_one) {
        const std::size_t row = phase_one ? m_ + 1 : m_;
        for (;;) {
            // Bland's rule: smallest index among improving columns.
            long s = -1;
            for (std::size_t j = 0; j <= n_; ++j) {
                if (!phase_one && nonbasis_[j] == -1) continue;
                if (t_[row][j] < -kEps && (s < 0 || nonbasis_[j] < nonbasis_[static_cast<std::size_t>(s)])) s = static_cast<long>(j);
            }
            if (s < 0) return true;
            const auto sc = static_cast<std::size_t>(s);
            long r = -1;
            for (std::size_t i = 0; i < m_; ++i) {
                if (t_[i][sc] <= kEps) continue;
                if (r < 0) {
                    r = static_cast<long>(i);
                    continue;
                }
                const auto rc = static_cast<std::size_t>(r);
                const double a = t_[i][n_ + 1] / t_[i][sc], b = t_[rc][n_ + 1] / t_[rc][sc];
                if (a < b || (a == b && basis_[i] < basis_[rc])) r = static_cast<long>(i);
            }
            if (r < 0) return false;
            pivot(static_cast<std::size_t>(r), sc);
        }
    }

    std::size_t m_, n_;
    std::vector<long> basis_, nonbasis_;
    std::vector<std::vector<double>> t_;
};

}  // namespace

Solution maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b, const std::vector<double>& c) {
    if (A.size() != b.size()) throw InputError("constraint rows and bounds differ in count");
    for (const auto& row : A)
        if (row.size() != c.size()) throw InputError("constraint row length differs from the objective");
    return Tableau(A, b, c).solve();
}

}  // namespace swgeo::lp
