#include "torcount/matrix.hpp"

#include <utility>

#include "torcount/errors.hpp"

namespace torcount {

IntMat identity_int(std::size_t n) {
    IntMat I(n, std::vector<BigInt>(n, 0));
    for (std::size_t i = 0; i < n; ++i) I[i][i] = 1;
    return I;
}

namespace {

BigInt floordiv(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
    return q;
}

void row_axpy(IntMat& M, std::size_t dst, std::size_t src, const BigInt& q) {
    for (std::size_t j = 0; j < M[dst].size(); ++j) M[dst][j] -= q * M[src][j];
}

void col_axpy(IntMat& M, std::size_t dst, std::size_t src, const BigInt& q) {
    for (auto& row : M) row[dst] -= q * row[src];
}

void col_swap(IntMat& M, std::size_t a, std::size_t b) {
    for (auto& row : M) std::swap(row[a], row[b]);
}

}  // namespace

SmithForm smith_normal_form(const IntMat& A) {
    SmithForm sf;
    std::size_t m = A.size(), n = m ? A[0].size() : 0;
    sf.D = A;
    sf.U = identity_int(m);
    sf.V = identity_int(n);
    IntMat& D = sf.D;
    std::size_t t = 0;
    for (; t < std::min(m, n); ++t) {
        for (;;) {
            // smallest nonzero entry in the trailing block becomes the pivot
            std::size_t pi = m, pj = n;
            for (std::size_t i = t; i < m; ++i)
                for (std::size_t j = t; j < n; ++j)
                    if (D[i][j] != 0 && (pi == m || abs(D[i][j]) < abs(D[pi][pj]))) pi = i, pj = j;
            if (pi == m) {
                sf.rank = t;
                goto done;
            }
            std::swap(D[t], D[pi]);
            std::swap(sf.U[t], sf.U[pi]);
            col_swap(D, t, pj);
            col_swap(sf.V, t, pj);
            bool clean = true;
            for (std::size_t i = t + 1; i < m; ++i) {
                if (D[i][t] == 0) continue;
                BigInt q = floordiv(D[i][t], D[t][t]);
                row_axpy(D, i, t, q);
                row_axpy(sf.U, i, t, q);
                if (D[i][t] != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < n; ++j) {
                if (D[t][j] == 0) continue;
                BigInt q = floordiv(D[t][j], D[t][t]);
                col_axpy(D, j, t, q);
                col_axpy(sf.V, j, t, q);
                if (D[t][j] != 0) clean = false;
            }
            if (!clean) continue;
            bool divides = true;
            for (std::size_t i = t + 1; i < m && divides; ++i)
                for (std::size_t j = t + 1; j < n; ++j)
                    if (D[i][j] % D[t][t] != 0) {
                        for (std::size_t k = 0; k < n; ++k) D[t][k] += D[i][k];
                        for (std::size_t k = 0; k < m; ++k) sf.U[t][k] += sf.U[i][k];
                        divides = false;
                        break;
                    }
            if (divides) break;
        }
        if (D[t][t] < 0) {
            for (auto& v : D[t]) v = -v;
            for (auto& v : sf.U[t]) v = -v;
        }
    }
    sf.rank = t;
done:
    return sf;
}

IntMat hermite_rows(IntMat A) {
    std::size_t m = A.size(), n = m ? A[0].size() : 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < m; ++col) {
        for (;;) {
            std::size_t best = m;
            for (std::size_t i = row; i < m; ++i)
                if (A[i][col] != 0 && (best == m || abs(A[i][col]) < abs(A[best][col]))) best = i;
            if (best == m) break;
            std::swap(A[row], A[best]);
            bool done = true;
            for (std::size_t i = row + 1; i < m; ++i) {
                if (A[i][col] == 0) continue;
                BigInt q = floordiv(A[i][col], A[row][col]);
                row_axpy(A, i, row, q);
                if (A[i][col] != 0) done = false;
            }
            if (done) break;
        }
        if (A[row][col] == 0) continue;
        if (A[row][col] < 0)
            for (auto& v : A[row]) v = -v;
        for (std::size_t i = 0; i < row; ++i) {
            BigInt q = floordiv(A[i][col], A[row][col]);
            if (q != 0) row_axpy(A, i, row, q);
        }
        ++row;
    }
    A.resize(row);
    return A;
}

IntMat integer_kernel(const IntMat& A) {
    std::size_t n = A.empty() ? 0 : A[0].size();
    SmithForm sf = smith_normal_form(A);
    IntMat basis;
    for (std::size_t j = sf.rank; j < n; ++j) {
        std::vector<BigInt> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = sf.V[i][j];
        basis.push_back(std::move(v));
    }
    return basis;
}

BigInt det_int(IntMat A) {
    // Bareiss fraction-free elimination
    std::size_t n = A.size();
    if (n == 0) return 1;
    int sign = 1;
    BigInt prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (A[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && A[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(A[k], A[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) / prev;
        prev = A[k][k];
    }
    return sign * A[n - 1][n - 1];
}

std::size_t rank_rat(RatMat A) {
    std::size_t m = A.size(), n = m ? A[0].size() : 0, row = 0;
    for (std::size_t col = 0; col < n && row < m; ++col) {
        std::size_t p = row;
        while (p < m && A[p][col] == 0) ++p;
        if (p == m) continue;
        std::swap(A[row], A[p]);
        for (std::size_t i = row + 1; i < m; ++i) {
            if (A[i][col] == 0) continue;
            Rational f = A[i][col] / A[row][col];
            for (std::size_t j = col; j < n; ++j) A[i][j] -= f * A[row][j];
        }
        ++row;
    }
    return row;
}

std::optional<RatVec> solve_square(RatMat A, RatVec b) {
    std::size_t n = A.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t p = col;
        while (p < n && A[p][col] == 0) ++p;
        if (p == n) return std::nullopt;
        std::swap(A[col], A[p]);
        std::swap(b[col], b[p]);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || A[i][col] == 0) continue;
            Rational f = A[i][col] / A[col][col];
            for (std::size_t j = col; j < n; ++j) A[i][j] -= f * A[col][j];
            b[i] -= f * b[col];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= A[i][i];
    return b;
}

Rational det_rat(RatMat A) {
    std::size_t n = A.size();
    Rational det = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t p = col;
        while (p < n && A[p][col] == 0) ++p;
        if (p == n) return 0;
        if (p != col) {
            std::swap(A[col], A[p]);
            det = -det;
        }
        det *= A[col][col];
        for (std::size_t i = col + 1; i < n; ++i) {
            if (A[i][col] == 0) continue;
            Rational f = A[i][col] / A[col][col];
            for (std::size_t j = col; j < n; ++j) A[i][j] -= f * A[col][j];
        }
    }
    return det;
}

RatMat to_rat(const IntMat& A) {
    RatMat R;
    R.reserve(A.size());
    for (const auto& row : A) {
        RatVec r;
        r.reserve(row.size());
        for (const auto& v : row) r.emplace_back(v);
        R.push_back(std::move(r));
    }
    return R;
}

}  // namespace torcount
