#include "adelic/smith.hpp"

#include <algorithm>

#include "adelic/error.hpp"

namespace adelic {

std::vector<mpz_class> integer_smith_form(ZMatrix m) {
    std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    std::size_t n = std::min(rows, cols);
    for (std::size_t t = 0; t < n; ++t) {
        // pivot: smallest nonzero absolute value in the remaining block
        while (true) {
            std::size_t pr = rows, pc = cols;
            for (std::size_t i = t; i < rows; ++i)
                for (std::size_t j = t; j < cols; ++j)
                    if (m[i][j] != 0 && (pr == rows || abs(m[i][j]) < abs(m[pr][pc]))) pr = i, pc = j;
            if (pr == rows) goto done;
            std::swap(m[t], m[pr]);
            for (auto& row : m) std::swap(row[t], row[pc]);
            bool clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                mpz_class q = m[i][t] / m[t][t];
                if (q != 0)
                    for (std::size_t j = t; j < cols; ++j) m[i][j] -= q * m[t][j];
                if (m[i][t] != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                mpz_class q = m[t][j] / m[t][t];
                if (q != 0)
                    for (std::size_t i = t; i < rows; ++i) m[i][j] -= q * m[i][t];
                if (m[t][j] != 0) clean = false;
            }
            if (!clean) continue;
            // divisibility of the rest of the block
            bool divides = true;
            for (std::size_t i = t + 1; i < rows && divides; ++i)
                for (std::size_t j = t + 1; j < cols; ++j)
                    if (m[i][j] % m[t][t] != 0) {
                        for (std::size_t k = t; k < cols; ++k) m[t][k] += m[i][k];
                        divides = false;
                        break;
                    }
            if (divides) break;
        }
    }
done:
    std::vector<mpz_class> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = abs(m[i][i]);
    return d;
}

int rank_over_field(const FiniteRing& f, RMatrix m) {
    if (!f.is_field()) throw Error(ErrorCode::InvalidArgument, "rank needs a field");
    std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = rows;
        for (std::size_t i = r; i < rows; ++i)
            if (m[i][c] != 0) { piv = i; break; }
        if (piv == rows) continue;
        std::swap(m[r], m[piv]);
        i64 inv = f.inv(m[r][c]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (m[i][c] == 0) continue;
            i64 q = f.mul(m[i][c], inv);
            for (std::size_t j = c; j < cols; ++j) m[i][j] = f.sub(m[i][j], f.mul(q, m[r][j]));
        }
        ++r;
    }
    return static_cast<int>(r);
}

std::vector<int> local_smith_valuations(const FiniteRing& R, RMatrix m) {
    if (R.kind() != FiniteRing::Kind::Residue) throw Error(ErrorCode::InvalidArgument, "local Smith form needs Z/p^n");
    i64 p = R.p();
    int n = R.n();
    auto val = [&](i64 a) { return a == 0 ? n : valuation(a, p); };
    std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    std::size_t k = std::min(rows, cols);
    std::vector<int> out;
    for (std::size_t t = 0; t < k; ++t) {
        std::size_t pr = rows, pc = cols;
        int best = n;
        for (std::size_t i = t; i < rows; ++i)
            for (std::size_t j = t; j < cols; ++j) {
                int v = val(m[i][j]);
                if (v < best) best = v, pr = i, pc = j;
            }
        if (pr == rows) {
            out.push_back(-1);
            continue;
        }
        std::swap(m[t], m[pr]);
        for (auto& row : m) std::swap(row[t], row[pc]);
        // pivot = p^best * unit
        i64 unit = m[t][t] / ipow(p, static_cast<unsigned>(best));
        i64 uinv = R.inv(R.from_int(unit));
        for (std::size_t i = t + 1; i < rows; ++i) {
            if (m[i][t] == 0) continue;
            // every entry has valuation >= best, so m[i][t] / p^best is integral
            i64 q = R.mul(m[i][t] / ipow(p, static_cast<unsigned>(best)), uinv);
            for (std::size_t j = t; j < cols; ++j) m[i][j] = R.sub(m[i][j], R.mul(q, m[t][j]));
        }
        for (std::size_t j = t + 1; j < cols; ++j) {
            if (m[t][j] == 0) continue;
            i64 q = R.mul(m[t][j] / ipow(p, static_cast<unsigned>(best)), uinv);
            for (std::size_t i = t; i < rows; ++i) m[i][j] = R.sub(m[i][j], R.mul(q, m[i][t]));
        }
        out.push_back(best);
    }
    std::sort(out.begin(), out.end(), [](int a, int b) {
        if (a < 0) return false;
        if (b < 0) return true;
        return a < b;
    });
    return out;
}

}  // namespace adelic
