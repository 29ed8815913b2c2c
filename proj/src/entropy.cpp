#include "fracspec/error.hpp"
#include "fracspec/s_numbers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace fracspec {

namespace {

// Realized vectors have at most 3 real coordinates.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

// l_p norm on real vectors; in the complex field consecutive pairs are (re, im) of one coordinate.
struct Norm {
    double p = 2.0;
    int stride = 1;

    double operator()(const Vec& v) const {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < v.size(); i += stride) {
            const double mod = stride == 2 ? std::hypot(v[i], v[i + 1]) : std::abs(v[i]);
            if (std::isinf(p)) acc = std::max(acc, mod);
            else if (p == 2.0) acc += mod * mod;
            else if (p == 1.0) acc += mod;
            else acc += std::pow(mod, p);
        }
        if (std::isinf(p) || p == 1.0) return acc;
        if (p == 2.0) return std::sqrt(acc);
        return std::pow(acc, 1.0 / p);
    }
};

Norm make_norm(double p, ScalarField field) { return {p, field == ScalarField::complex ? 2 : 1}; }

// Volume of the unit l_p ball in K^N as a subset of R^{N} or R^{2N}.
double ball_volume(double p, int n, ScalarField field) {
    const double inv = std::isinf(p) ? 0.0 : 1.0 / p;
    if (field == ScalarField::real) return std::pow(2.0 * std::tgamma(1.0 + inv), n) / std::tgamma(1.0 + n * inv);
    return std::pow(std::numbers::pi * std::tgamma(1.0 + 2.0 * inv), n) / std::tgamma(1.0 + 2.0 * n * inv);
}

Eigen::MatrixXd realify(const Eigen::MatrixXcd& a, ScalarField field) {
    if (field == ScalarField::real) {
        require(a.imag().cwiseAbs().maxCoeff() == 0.0, Errc::precondition, "real-field entropy needs a real matrix");
        return a.real();
    }
    Eigen::MatrixXd m(2 * a.rows(), 2 * a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double re = a(i, j).real(), im = a(i, j).imag();
            m(2 * i, 2 * j) = re;
            m(2 * i, 2 * j + 1) = -im;
            m(2 * i + 1, 2 * j) = im;
            m(2 * i + 1, 2 * j + 1) = re;
        }
    return m;
}

class CenterSearch {
public:
    // Centers are searched on a strided subsample of at most search_size points and then
    // polished on the full set; the returned radius is always measured on the full set.
    CenterSearch(const std::vector<Vec>& pts, Norm norm, bool box_midpoint, int iterations, std::size_t search_size = 2000)
        : full_(pts), norm_(norm), box_midpoint_(box_midpoint), iterations_(iterations) {
        const std::size_t stride = std::max<std::size_t>(1, (pts.size() + search_size - 1) / search_size);
        for (std::size_t i = 0; i < pts.size(); i += stride) coarse_.push_back(pts[i]);
    }

    double radius_for(std::size_t centers) const {
        if (full_.empty()) return 0.0;
        std::vector<Vec> best;
        double best_r = INFINITY;
        auto consider = [&](std::vector<Vec> c) {
            const double r = lloyd(coarse_, c, iterations_);
            if (r < best_r) {
                best_r = r;
                best = std::move(c);
            }
        };
        consider(gonzalez(coarse_, centers));
        for (auto& init : slab_inits(coarse_, centers)) consider(std::move(init));
        return lloyd(full_, best, 3);
    }

private:
    const std::vector<Vec>& full_;
    std::vector<Vec> coarse_;
    Norm norm_;
    bool box_midpoint_;
    int iterations_;

    std::vector<Vec> gonzalez(const std::vector<Vec>& pts_, std::size_t k) const {
        std::size_t first = 0;
        double smallest = INFINITY;
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            const double v = norm_(pts_[i]);
            if (v < smallest) {
                smallest = v;
                first = i;
            }
        }
        std::vector<Vec> centers{pts_[first]};
        std::vector<double> dist(pts_.size());
        for (std::size_t i = 0; i < pts_.size(); ++i) dist[i] = norm_(pts_[i] - centers[0]);
        while (centers.size() < k) {
            const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
            if (dist[far] == 0.0) break;
            centers.push_back(pts_[far]);
            for (std::size_t i = 0; i < pts_.size(); ++i) dist[i] = std::min(dist[i], norm_(pts_[i] - centers.back()));
        }
        return centers;
    }

    std::vector<std::vector<Vec>> slab_inits(const std::vector<Vec>& pts_, std::size_t k) const {
        const auto dim = pts_.front().size();
        Vec lo = pts_.front(), hi = pts_.front();
        for (const auto& p : pts_) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        std::vector<std::vector<Vec>> out;
        std::vector<std::size_t> counts(static_cast<std::size_t>(dim), 1);
        std::function<void(Eigen::Index, std::size_t)> rec = [&](Eigen::Index axis, std::size_t budget) {
            if (axis == dim) {
                std::size_t total = 1;
                for (auto c : counts) total *= c;
                for (auto c : counts)
                    if (total / c * (c + 1) <= k) return; // not maximal
                std::vector<Vec> centers;
                for (std::size_t flat = 0; flat < total; ++flat) {
                    Vec c(dim);
                    std::size_t rem = flat;
                    for (Eigen::Index a = 0; a < dim; ++a) {
                        const auto n = counts[static_cast<std::size_t>(a)];
                        const auto i = rem % n;
                        rem /= n;
                        c[a] = lo[a] + (hi[a] - lo[a]) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
                    }
                    centers.push_back(c);
                }
                out.push_back(std::move(centers));
                return;
            }
            for (std::size_t c = 1; c <= budget; ++c) {
                counts[static_cast<std::size_t>(axis)] = c;
                rec(axis + 1, budget / c);
            }
            counts[static_cast<std::size_t>(axis)] = 1;
        };
        rec(0, k);
        return out;
    }

    Vec minimax_center(const std::vector<Vec>& pts_, const std::vector<std::size_t>& members, const Vec& start) const {
        if (box_midpoint_) {
            Vec lo = pts_[members.front()], hi = lo;
            for (auto i : members) {
                lo = lo.cwiseMin(pts_[i]);
                hi = hi.cwiseMax(pts_[i]);
            }
            return 0.5 * (lo + hi);
        }
        // Badoiu-Clarkson iteration toward the minimum enclosing ball center.
        Vec c = start;
        for (int t = 1; t <= 60; ++t) {
            std::size_t far = members.front();
            double fd = -1.0;
            for (auto i : members) {
                const double v = norm_(pts_[i] - c);
                if (v > fd) {
                    fd = v;
                    far = i;
                }
            }
            c += (pts_[far] - c) / static_cast<double>(t + 1);
        }
        return c;
    }

    double assign(const std::vector<Vec>& pts_, const std::vector<Vec>& centers, std::vector<std::size_t>& owner) const {
        double radius = 0.0;
        owner.assign(pts_.size(), 0);
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            double best = INFINITY;
            for (std::size_t c = 0; c < centers.size(); ++c) {
                const double v = norm_(pts_[i] - centers[c]);
                if (v < best) {
                    best = v;
                    owner[i] = c;
                }
            }
            radius = std::max(radius, best);
        }
        return radius;
    }

    // Updates centers in place; returns the covering radius of pts_.
    double lloyd(const std::vector<Vec>& pts_, std::vector<Vec>& centers, int iterations) const {
        std::vector<std::size_t> owner;
        double radius = assign(pts_, centers, owner);
        for (int it = 0; it < iterations; ++it) {
            std::vector<std::vector<std::size_t>> groups(centers.size());
            for (std::size_t i = 0; i < pts_.size(); ++i) groups[owner[i]].push_back(i);
            auto next = centers;
            for (std::size_t c = 0; c < centers.size(); ++c)
                if (!groups[c].empty()) next[c] = minimax_center(pts_, groups[c], centers[c]);
            std::vector<std::size_t> next_owner;
            const double r = assign(pts_, next, next_owner);
            if (!(r < radius * (1.0 - 1e-12))) break;
            radius = r;
            centers = std::move(next);
            owner = std::move(next_owner);
        }
        return radius;
    }
};

} // namespace

EntropyBounds entropy_numbers_bruteforce(const Eigen::MatrixXcd& matrix, int k_max, NormPair norms, ScalarField field,
                                         const EntropyOptions& options) {
    require(k_max >= 1 && k_max <= 7, Errc::precondition, "k_max must lie in 1..7");
    const Eigen::MatrixXd m = realify(matrix, field);
    const auto dom = static_cast<int>(m.cols());
    const auto cod = static_cast<int>(m.rows());
    if (dom > 3 || cod > 3)
        fail(Errc::dimension_too_large, "realized real dimension " + std::to_string(std::max(dom, cod)) + " exceeds 3");
    const Norm dom_norm = make_norm(norms.p_domain, field);
    const Norm cod_norm = make_norm(norms.p_codomain, field);

    const int g = dom == 1 ? options.points_1d : dom == 2 ? options.points_2d : options.points_3d;
    require(g >= 3, Errc::precondition, "sample grid too coarse");
    const double h = 2.0 / (g - 1);

    // Grid cells meeting U_A, plus the subset of grid points inside U_A.
    std::vector<Vec> net, inside;
    std::size_t total = 1;
    for (int a = 0; a < dom; ++a) total *= static_cast<std::size_t>(g);
    Vec pt(dom), shrunk(dom);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = dom - 1; a >= 0; --a) {
            pt[a] = -1.0 + h * static_cast<double>(rem % static_cast<std::size_t>(g));
            rem /= static_cast<std::size_t>(g);
            shrunk[a] = std::copysign(std::max(std::abs(pt[a]) - 0.5 * h, 0.0), pt[a]);
        }
        if (dom_norm(shrunk) > 1.0) continue;
        net.push_back(m * pt);
        if (dom_norm(pt) <= 1.0) inside.push_back(net.back());
    }

    double inflation = 0.0;
    for (int v = 0; v < (1 << dom); ++v) {
        Vec corner(dom);
        for (int a = 0; a < dom; ++a) corner[a] = ((v >> a) & 1) ? 0.5 * h : -0.5 * h;
        inflation = std::max(inflation, cod_norm(m * corner));
    }

    const auto kk = static_cast<std::size_t>(k_max);
    std::vector<double> upper(kk), lower(kk, 0.0);
    const bool box = std::isinf(norms.p_codomain) && field == ScalarField::real;
    CenterSearch search(net, cod_norm, box, options.lloyd_iterations);
    double image_norm = 0.0;
    for (const auto& y : net) image_norm = std::max(image_norm, cod_norm(y));
    for (std::size_t k = 1; k <= kk; ++k) {
        double r = search.radius_for(std::size_t{1} << (k - 1));
        if (k == 1) r = std::min(r, image_norm);
        upper[k - 1] = r + inflation;
    }

    // Lower bounds: norm, packing and volume.
    double inside_norm = 0.0;
    for (const auto& y : inside) inside_norm = std::max(inside_norm, cod_norm(y));
    lower[0] = inside_norm;
    if (!inside.empty()) {
        std::vector<double> dist(inside.size());
        std::size_t first = 0;
        for (std::size_t i = 0; i < inside.size(); ++i)
            if (cod_norm(inside[i]) > cod_norm(inside[first])) first = i;
        for (std::size_t i = 0; i < inside.size(); ++i) dist[i] = cod_norm(inside[i] - inside[first]);
        double min_pair = INFINITY;
        std::size_t chosen = 1;
        const std::size_t need = (std::size_t{1} << (kk - 1)) + 1;
        while (chosen < need) {
            const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
            if (dist[far] == 0.0) break;
            min_pair = std::min(min_pair, dist[far]);
            ++chosen;
            // chosen = 2^{k-1} + 1 points certify e_k >= min_pair / 2.
            for (std::size_t k = 1; k <= kk; ++k)
                if (chosen == (std::size_t{1} << (k - 1)) + 1) lower[k - 1] = std::max(lower[k - 1], 0.5 * min_pair);
            const Vec pick = inside[far];
            for (std::size_t i = 0; i < inside.size(); ++i) dist[i] = std::min(dist[i], cod_norm(inside[i] - pick));
        }
    }
    if (dom == cod) {
        const double det = std::abs(m.determinant());
        const int n = field == ScalarField::complex ? dom / 2 : dom;
        const double ratio = det * ball_volume(norms.p_domain, n, field) / ball_volume(norms.p_codomain, n, field);
        for (std::size_t k = 1; k <= kk; ++k)
            lower[k - 1] = std::max(lower[k - 1], std::pow(ratio / std::ldexp(1.0, static_cast<int>(k) - 1), 1.0 / dom));
    }

    for (std::size_t k = 1; k < kk; ++k) upper[k] = std::min(upper[k], upper[k - 1]);
    for (std::size_t k = kk - 1; k > 0; --k) lower[k - 1] = std::max(lower[k - 1], lower[k]);

    nlohmann::json ctx = {{"p_domain", std::isinf(norms.p_domain) ? nlohmann::json("inf") : nlohmann::json(norms.p_domain)},
                          {"p_codomain", std::isinf(norms.p_codomain) ? nlohmann::json("inf") : nlohmann::json(norms.p_codomain)},
                          {"field", field == ScalarField::real ? "real" : "complex"},
                          {"rows", matrix.rows()},
                          {"cols", matrix.cols()},
                          {"grid_points_per_axis", g},
                          {"net_size", net.size()},
                          {"net_inflation", inflation}};
    EntropyBounds out;
    out.net_inflation = inflation;
    out.lower = {SKind::entropy_lower, lower, ctx};
    out.upper = {SKind::entropy_upper, upper, ctx};
    return out;
}

namespace {

// Certified radius for covering the unit disk by n disks.
double disk_cover_radius(std::size_t n) {
    double best = 1.0;
    if (n >= 3) best = std::min(best, std::sqrt(3.0) / 2.0);
    if (n >= 4) best = std::min(best, std::sqrt(0.5));
    if (n >= 7) best = std::min(best, 0.5);
    for (std::size_t g = 2; g * g <= n; ++g) best = std::min(best, std::sqrt(2.0) / static_cast<double>(g));
    return best;
}

} // namespace

SNumberSequence entropy_upper_hilbert(const std::vector<double>& singular_values, int k_max, ScalarField field) {
    require(k_max >= 1 && k_max <= 20, Errc::precondition, "k_max must lie in 1..20");
    std::vector<double> sigma = singular_values;
    std::sort(sigma.begin(), sigma.end(), std::greater<>());
    const double top = sigma.empty() ? 0.0 : sigma.front();
    auto radius = [field](std::size_t n) {
        return field == ScalarField::real ? 1.0 / static_cast<double>(n) : disk_cover_radius(n);
    };

    std::vector<double> values(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        const std::size_t budget = std::size_t{1} << (k - 1);
        double best = top;
        std::function<void(std::size_t, std::size_t, double)> rec = [&](std::size_t axis, std::size_t left, double acc) {
            if (acc >= best * best) return;
            if (axis == sigma.size() || left == 1) {
                double rest = acc;
                for (std::size_t i = axis; i < sigma.size(); ++i) rest += sigma[i] * sigma[i];
                best = std::min(best, std::sqrt(rest));
                return;
            }
            for (std::size_t c = 1; c <= left; ++c) {
                const double r = sigma[axis] * radius(c);
                rec(axis + 1, left / c, acc + r * r);
            }
        };
        rec(0, budget, 0.0);
        values[static_cast<std::size_t>(k - 1)] = best;
    }
    for (std::size_t k = 1; k < values.size(); ++k) values[k] = std::min(values[k], values[k - 1]);
    return {SKind::entropy_upper, values,
            {{"method", "product-cover"}, {"field", field == ScalarField::real ? "real" : "complex"}, {"norms", "l2->l2"}}};
}

double entropy_estimate_diagonal(const std::vector<double>& sigma, int k) {
    require(k >= 1, Errc::precondition, "k must be >= 1");
    double best = 0.0, log_prod = 0.0;
    for (std::size_t j = 1; j <= sigma.size(); ++j) {
        if (sigma[j - 1] <= 0.0) break;
        log_prod += std::log(sigma[j - 1]);
        const double jj = static_cast<double>(j);
        best = std::max(best, std::exp(-(k - 1) * std::numbers::ln2 / jj + log_prod / jj));
    }
    return best;
}

} // namespace fracspec
