#include "nonlocal/czkit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace nonlocal {

DyadicCube DyadicCube::parent(int d) const {
    if (level == 0 || path.empty()) throw std::logic_error("DyadicCube: root has no parent");
    DyadicCube p = *this;
    const int child = p.path.back();
    p.path.pop_back();
    --p.level;
    p.side_cells = side_cells * 2;
    if (child & 1) p.origin[0] -= side_cells;
    if (d == 2 && (child & 2)) p.origin[1] -= side_cells;
    return p;
}

std::vector<DyadicCube> DyadicCube::children(int d) const {
    if (side_cells % 2 != 0) throw std::logic_error("DyadicCube: odd side cannot bisect");
    const long half = side_cells / 2;
    std::vector<DyadicCube> out;
    const int nc = d == 1 ? 2 : 4;
    out.reserve(nc);
    for (int c = 0; c < nc; ++c) {
        DyadicCube ch = *this;
        ch.side_cells = half;
        ch.level = level + 1;
        ch.path.push_back(c);
        if (c & 1) ch.origin[0] += half;
        if (d == 2 && (c & 2)) ch.origin[1] += half;
        out.push_back(std::move(ch));
    }
    return out;
}

DyadicCube root_cube(const Grid& g) {
    DyadicCube q;
    q.origin = {0, 0};
    q.side_cells = g.cells_per_dim;
    q.level = 0;
    return q;
}

namespace {

// exact A-cell counts over rectangles via prefix sums
struct CellCounter {
    int d = 1;
    long n = 0;
    std::vector<long> pre;  // (n+1) or (n+1)^2

    CellCounter(const Grid& g, const std::vector<std::size_t>& A) : d(g.dimension), n(g.cells_per_dim) {
        if (d == 1) {
            pre.assign(n + 1, 0);
            std::vector<char> mask(n, 0);
            for (std::size_t c : A) {
                if (c >= static_cast<std::size_t>(n)) throw std::invalid_argument("cz: cell index out of range");
                mask[c] = 1;
            }
            for (long i = 0; i < n; ++i) pre[i + 1] = pre[i] + mask[i];
        } else {
            pre.assign((n + 1) * (n + 1), 0);
            std::vector<char> mask(n * n, 0);
            for (std::size_t c : A) {
                if (c >= static_cast<std::size_t>(n * n))
                    throw std::invalid_argument("cz: cell index out of range");
                mask[c] = 1;
            }
            for (long y = 0; y < n; ++y)
                for (long x = 0; x < n; ++x)
                    pre[(y + 1) * (n + 1) + (x + 1)] = mask[y * n + x] + pre[y * (n + 1) + (x + 1)] +
                                                       pre[(y + 1) * (n + 1) + x] -
                                                       pre[y * (n + 1) + x];
        }
    }

    long count(const DyadicCube& q) const {
        if (d == 1) {
            const long a = std::clamp(q.origin[0], 0L, n);
            const long b = std::clamp(q.origin[0] + q.side_cells, 0L, n);
            return pre[b] - pre[a];
        }
        const long x0 = std::clamp(q.origin[0], 0L, n), x1 = std::clamp(q.origin[0] + q.side_cells, 0L, n);
        const long y0 = std::clamp(q.origin[1], 0L, n), y1 = std::clamp(q.origin[1] + q.side_cells, 0L, n);
        return pre[y1 * (n + 1) + x1] - pre[y0 * (n + 1) + x1] - pre[y1 * (n + 1) + x0] +
               pre[y0 * (n + 1) + x0];
    }
};

void cz_recurse(const Grid& g, const CellCounter& cnt, const DyadicCube& q, double delta,
                int max_level, CZResult& out) {
    // invariant on entry: density(q) <= delta and q holds at least one A-cell
    if (q.level >= max_level || q.side_cells % 2 != 0) {
        out.residual_cells += cnt.count(q);
        return;
    }
    for (const DyadicCube& ch : q.children(g.dimension)) {
        const long c = cnt.count(ch);
        if (c == 0) continue;
        const long cells = ch.cell_count(g.dimension);
        if (static_cast<double>(c) > delta * static_cast<double>(cells)) {
            out.selected.push_back(ch);
            out.certificates.push_back(
                {c, cells, cnt.count(q), q.cell_count(g.dimension)});
        } else {
            cz_recurse(g, cnt, ch, delta, max_level, out);
        }
    }
}

}  // namespace

CZResult cz_decompose(const Grid& g, const DyadicCube& Q, const std::vector<std::size_t>& A,
                      double delta, int max_level) {
    g.validate();
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("cz_decompose: delta in (0,1)");
    if (max_level < 0) throw std::invalid_argument("cz_decompose: max_level >= 0");

    CellCounter cnt(g, A);
    const long total = cnt.count(Q);
    if (total != static_cast<long>(A.size()))
        throw std::domain_error("cz_decompose: A is not contained in Q");
    if (total == 0) throw std::invalid_argument("cz_decompose: A is empty");
    if (static_cast<double>(total) >= delta * static_cast<double>(Q.cell_count(g.dimension)))
        throw std::invalid_argument("cz_decompose: |A| >= delta |Q|");

    // grid compatibility: cubes at max_level must hold whole cells
    long side = Q.side_cells;
    for (int l = 0; l < max_level && side % 2 == 0; ++l) side /= 2;

    CZResult out;
    out.delta = delta;
    cz_recurse(g, cnt, Q, delta, max_level, out);
    out.residual_measure = out.residual_cells * g.cell_measure();
    return out;
}

// ---- maximal function -------------------------------------------------------

namespace {

// For each x in [0, outlen): max of arr[a] over a in [max(0, x-win+1),
// min(x, alen-1)] — the windows of width `win` that cover position x.
void coverage_max(const std::vector<double>& arr, long win, long outlen, std::vector<double>& out) {
    const long alen = static_cast<long>(arr.size());
    out.assign(outlen, 0.0);
    if (alen == 0) return;
    std::vector<double> prefix(alen), suffix(alen);
    prefix[0] = arr[0];
    for (long i = 1; i < alen; ++i) prefix[i] = std::max(prefix[i - 1], arr[i]);
    suffix[alen - 1] = arr[alen - 1];
    for (long i = alen - 2; i >= 0; --i) suffix[i] = std::max(suffix[i + 1], arr[i]);
    // interior spans have exactly `win` entries; sliding maximum by deque
    std::vector<double> slide;
    if (alen >= win) {
        slide.assign(alen - win + 1, 0.0);
        std::deque<long> dq;
        for (long i = 0; i < alen; ++i) {
            while (!dq.empty() && arr[dq.back()] <= arr[i]) dq.pop_back();
            dq.push_back(i);
            if (dq.front() <= i - win) dq.pop_front();
            if (i >= win - 1) slide[i - win + 1] = arr[dq.front()];
        }
    }
    for (long x = 0; x < outlen; ++x) {
        const long lo = std::max(0L, x - win + 1);
        const long hi = std::min(x, alen - 1);
        if (lo > hi) continue;
        if (lo == 0)
            out[x] = prefix[hi];
        else if (hi == alen - 1)
            out[x] = suffix[lo];
        else
            out[x] = slide[lo];
    }
}

}  // namespace

GridFunction maximal(const GridFunction& g, const std::optional<DyadicCube>& localized_to) {
    const Grid& gr = g.grid;
    const int d = gr.dimension;
    const long n = gr.cells_per_dim;
    for (const cplx& v : g.values)
        if (v.real() < 0.0 || v.imag() != 0.0)
            throw std::domain_error("maximal: input must be nonnegative real");

    long x0 = 0, x1 = n, y0 = 0, y1 = (d == 2 ? n : 1);
    if (localized_to) {
        x0 = std::max(0L, localized_to->origin[0]);
        x1 = std::min(n, localized_to->origin[0] + localized_to->side_cells);
        if (d == 2) {
            y0 = std::max(0L, localized_to->origin[1]);
            y1 = std::min(n, localized_to->origin[1] + localized_to->side_cells);
        }
    }
    const long wx = x1 - x0, wy = y1 - y0;
    GridFunction out(gr);
    if (wx <= 0 || (d == 2 && wy <= 0)) return out;

    if (d == 1) {
        std::vector<double> vals(wx);
        for (long i = 0; i < wx; ++i) vals[i] = g[x0 + i].real();
        std::vector<double> pre(wx + 1, 0.0);
        for (long i = 0; i < wx; ++i) pre[i + 1] = pre[i] + vals[i];
        std::vector<double> best(wx, 0.0);
        std::vector<double> means, cov;
        for (long s = 1; s <= wx; ++s) {
            means.assign(wx - s + 1, 0.0);
            for (long a = 0; a + s <= wx; ++a) means[a] = (pre[a + s] - pre[a]) / s;
            coverage_max(means, s, wx, cov);
            for (long i = 0; i < wx; ++i)
                if (cov[i] > best[i]) best[i] = cov[i];
        }
        for (long i = 0; i < wx; ++i) out[x0 + i] = cplx{best[i], 0.0};
        return out;
    }

    // d = 2: squares only
    std::vector<double> vals(wx * wy);
    for (long y = 0; y < wy; ++y)
        for (long x = 0; x < wx; ++x) vals[y * wx + x] = g[(y0 + y) * n + (x0 + x)].real();
    std::vector<double> pre((wx + 1) * (wy + 1), 0.0);
    for (long y = 0; y < wy; ++y)
        for (long x = 0; x < wx; ++x)
            pre[(y + 1) * (wx + 1) + (x + 1)] = vals[y * wx + x] + pre[y * (wx + 1) + (x + 1)] +
                                                pre[(y + 1) * (wx + 1) + x] - pre[y * (wx + 1) + x];
    std::vector<double> best(wx * wy, 0.0);
    const long smax = std::min(wx, wy);
    std::vector<double> means, line, cov, col, covc;
    std::vector<double> tmp;
    for (long s = 1; s <= smax; ++s) {
        const long ax = wx - s + 1, ay = wy - s + 1;
        means.assign(ax * ay, 0.0);
        for (long b = 0; b < ay; ++b)
            for (long a = 0; a < ax; ++a)
                means[b * ax + a] =
                    (pre[(b + s) * (wx + 1) + (a + s)] - pre[b * (wx + 1) + (a + s)] -
                     pre[(b + s) * (wx + 1) + a] + pre[b * (wx + 1) + a]) /
                    static_cast<double>(s * s);
        tmp.assign(ay * wx, 0.0);
        for (long b = 0; b < ay; ++b) {
            line.assign(means.begin() + b * ax, means.begin() + (b + 1) * ax);
            coverage_max(line, s, wx, cov);
            for (long x = 0; x < wx; ++x) tmp[b * wx + x] = cov[x];
        }
        for (long x = 0; x < wx; ++x) {
            col.assign(ay, 0.0);
            for (long b = 0; b < ay; ++b) col[b] = tmp[b * wx + x];
            coverage_max(col, s, wy, covc);
            for (long y = 0; y < wy; ++y)
                if (covc[y] > best[y * wx + x]) best[y * wx + x] = covc[y];
        }
    }
    for (long y = 0; y < wy; ++y)
        for (long x = 0; x < wx; ++x) out[(y0 + y) * n + (x0 + x)] = cplx{best[y * wx + x], 0.0};
    return out;
}

DistributionSet distribution_set_from_maximal(const GridFunction& mg, double lambda) {
    if (lambda < 0.0) throw std::domain_error("distribution_set: lambda >= 0 required");
    DistributionSet out;
    for (std::size_t i = 0; i < mg.size(); ++i)
        if (mg[i].real() > lambda) out.cells.push_back(i);
    out.count = static_cast<long>(out.cells.size());
    out.measure = out.count * mg.grid.cell_measure();
    return out;
}

DistributionSet distribution_set(const GridFunction& g, double lambda) {
    return distribution_set_from_maximal(maximal(g), lambda);
}

double good_lambda_delta_threshold(double q, int d) {
    return std::pow(2.0 * std::pow(5.0, d), -0.5 * q);
}

GoodLambdaResult good_lambda_check(const GridFunction& Tf_sq, const GridFunction& f_sq, double q,
                                   double delta, double gamma,
                                   const std::vector<double>& lambda_grid) {
    if (!(q > 2.0)) throw std::domain_error("good_lambda_check: q > 2 required");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("good_lambda_check: delta in (0,1) required");
    if (!(gamma > 0.0)) throw std::domain_error("good_lambda_check: gamma > 0 required");
    const int d = Tf_sq.grid.dimension;
    const double A = 1.0 / (2.0 * std::pow(delta, 2.0 / q));
    const double five_d = std::pow(5.0, d);
    if (!(A > five_d)) {
        std::ostringstream os;
        os << "good_lambda_check: A = " << A << " <= 5^d = " << five_d
           << "; delta must stay below " << good_lambda_delta_threshold(q, d);
        throw std::invalid_argument(os.str());
    }

    GoodLambdaResult res;
    res.A = A;
    res.delta = delta;
    res.gamma = gamma;
    res.q = q;

    const GridFunction MT = maximal(Tf_sq);
    const GridFunction MF = maximal(f_sq);
    const double hd = Tf_sq.grid.cell_measure();
    for (double lam : lambda_grid) {
        GoodLambdaRow row;
        row.lambda = lam;
        row.count_EA = distribution_set_from_maximal(MT, A * lam).count;
        row.count_E = distribution_set_from_maximal(MT, lam).count;
        row.count_F = distribution_set_from_maximal(MF, lam * gamma).count;
        row.lhs = row.count_EA * hd;
        row.rhs = delta * row.count_E * hd + row.count_F * hd;
        row.pass = static_cast<double>(row.count_EA) <=
                   delta * static_cast<double>(row.count_E) + static_cast<double>(row.count_F);
        row.margin = row.rhs - row.lhs;
        res.rows.push_back(row);
        res.all_pass = res.all_pass && row.pass;
    }
    return res;
}

}  // namespace nonlocal
