#include "fracspec/psido.hpp"

#include "fracspec/error.hpp"
#include "fracspec/fft.hpp"

#include <cmath>
#include <limits>

namespace fracspec {

double bessel_weight(double alpha, const Eigen::VectorXd& xi) { return std::pow(1.0 + xi.squaredNorm(), alpha / 2); }

Symbol identity_symbol() {
    Symbol s;
    s.name = "identity";
    s.evaluate = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return std::complex<double>(1.0); };
    s.x_independent = true;
    s.terms = {{[](const Eigen::VectorXd&) { return std::complex<double>(1.0); },
                [](const Eigen::VectorXd&) { return std::complex<double>(1.0); }}};
    return s;
}

Symbol bessel_power_symbol(double sigma) {
    Symbol s;
    s.name = "bessel_power";
    s.params = {{"sigma", sigma}};
    s.order = sigma;
    s.evaluate = [sigma](const Eigen::VectorXd&, const Eigen::VectorXd& xi) {
        return std::complex<double>(bessel_weight(sigma, xi));
    };
    s.x_independent = true;
    s.terms = {{[](const Eigen::VectorXd&) { return std::complex<double>(1.0); },
                [sigma](const Eigen::VectorXd& xi) { return std::complex<double>(bessel_weight(sigma, xi)); }}};
    return s;
}

Symbol separable_demo_symbol(double sigma, double amplitude) {
    Symbol s;
    s.name = "separable_demo";
    s.params = {{"sigma", sigma}, {"amplitude", amplitude}};
    s.order = sigma;
    s.evaluate = [sigma, amplitude](const Eigen::VectorXd& x, const Eigen::VectorXd& xi) {
        return std::complex<double>((1.0 + amplitude * std::cos(x[0])) * bessel_weight(sigma, xi));
    };
    s.terms = {{[amplitude](const Eigen::VectorXd& x) { return std::complex<double>(1.0 + amplitude * std::cos(x[0])); },
                [sigma](const Eigen::VectorXd& xi) { return std::complex<double>(bessel_weight(sigma, xi)); }}};
    return s;
}

Symbol exotic_demo_symbol() {
    Symbol s;
    s.name = "exotic_demo";
    s.type_delta = 1.0;
    s.evaluate = [](const Eigen::VectorXd& x, const Eigen::VectorXd& xi) {
        const double r = xi.norm();
        std::complex<double> acc = dyadic_piece(0, r);
        // phi_j(r) vanishes unless 2^{j-1} <= r <= 3 * 2^{j-1}.
        const int top = r < 1.0 ? 0 : static_cast<int>(std::floor(std::log2(r))) + 2;
        for (int j = std::max(1, top - 2); j <= top; ++j) {
            const double piece = dyadic_piece(j, r);
            if (piece != 0.0) acc += std::polar(piece, std::ldexp(x[0], j));
        }
        return acc;
    };
    return s;
}

Symbol symbol_from_catalog(const std::string& name, const nlohmann::json& params) {
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (auto it = params.begin(); it != params.end(); ++it) {
            bool known = false;
            for (const char* k : keys) known = known || it.key() == k;
            if (!known) fail(Errc::config, "unknown parameter '" + it.key() + "' for symbol " + name);
        }
    };
    auto number = [&](const char* key, double fallback, bool required) {
        if (!params.contains(key)) {
            if (required) fail(Errc::config, std::string("symbol ") + name + " needs parameter '" + key + "'");
            return fallback;
        }
        if (!params.at(key).is_number()) fail(Errc::config, std::string("parameter '") + key + "' must be a number");
        return params.at(key).get<double>();
    };
    if (!params.is_null() && !params.is_object()) fail(Errc::config, "symbol params must be an object");
    if (name == "identity") {
        allow({});
        return identity_symbol();
    }
    if (name == "bessel_power") {
        allow({"sigma"});
        return bessel_power_symbol(number("sigma", 0.0, true));
    }
    if (name == "separable_demo") {
        allow({"sigma", "amplitude"});
        const double amp = number("amplitude", 0.5, false);
        if (!(std::abs(amp) < 1.0)) fail(Errc::config, "separable_demo amplitude must satisfy |amplitude| < 1");
        return separable_demo_symbol(number("sigma", 0.0, true), amp);
    }
    if (name == "exotic_demo") {
        allow({});
        return exotic_demo_symbol();
    }
    fail(Errc::config, "unknown symbol '" + name + "'");
}

const DerivativeBound* SymbolValidation::find(const std::vector<int>& alpha, const std::vector<int>& gamma) const {
    for (const auto& b : bounds)
        if (b.alpha == alpha && b.gamma == gamma) return &b;
    return nullptr;
}

nlohmann::json SymbolValidation::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& b : bounds)
        rows.push_back({{"alpha", b.alpha},
                        {"gamma", b.gamma},
                        {"c_hat", b.c_hat},
                        {"c_hat_refined", b.c_hat_refined},
                        {"richardson", b.richardson},
                        {"stable", b.stable}});
    return {{"symbol", symbol},  {"order", order}, {"type_delta", type_delta},
            {"verdict", pass ? "PASS" : "FAIL"}, {"reason", reason}, {"bounds", rows}};
}

namespace {

std::vector<std::vector<int>> multi_indices(int dim, int max_order) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        int total = 0;
        for (int v : idx) total += v;
        if (total <= max_order) out.push_back(idx);
        int a = dim - 1;
        while (a >= 0 && idx[static_cast<std::size_t>(a)] == max_order) idx[static_cast<std::size_t>(a--)] = 0;
        if (a < 0) break;
        ++idx[static_cast<std::size_t>(a)];
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
        int sl = 0, sr = 0;
        for (int v : l) sl += v;
        for (int v : r) sr += v;
        return sl < sr;
    });
    return out;
}

double binomial(int k, int i) {
    double c = 1.0;
    for (int t = 1; t <= i; ++t) c = c * (k - i + t) / t;
    return c;
}

// Central tensor stencil for D^alpha_x D^gamma_xi at (x, xi).
std::complex<double> finite_difference(const Symbol& sym, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                                       const std::vector<int>& alpha, const std::vector<int>& gamma, double hx,
                                       double hxi) {
    const int n = static_cast<int>(x.size());
    std::vector<int> orders(alpha);
    orders.insert(orders.end(), gamma.begin(), gamma.end());
    std::vector<int> pos(orders.size(), 0);
    std::complex<double> acc = 0.0;
    Eigen::VectorXd px(n), pxi(n);
    while (true) {
        double coeff = 1.0;
        for (int a = 0; a < 2 * n; ++a) {
            const int k = orders[static_cast<std::size_t>(a)];
            const int i = pos[static_cast<std::size_t>(a)];
            coeff *= ((i % 2) ? -1.0 : 1.0) * binomial(k, i);
            const double off = (0.5 * k - i);
            if (a < n) px[a] = x[a] + off * hx;
            else pxi[a - n] = xi[a - n] + off * hxi;
        }
        acc += coeff * sym(px, pxi);
        int a = 2 * n - 1;
        while (a >= 0 && pos[static_cast<std::size_t>(a)] == orders[static_cast<std::size_t>(a)])
            pos[static_cast<std::size_t>(a--)] = 0;
        if (a < 0) break;
        ++pos[static_cast<std::size_t>(a)];
    }
    int ax = 0, ag = 0;
    for (int v : alpha) ax += v;
    for (int v : gamma) ag += v;
    return acc / (std::pow(hx, ax) * std::pow(hxi, ag));
}

struct ProbeSet {
    std::vector<Eigen::VectorXd> xs;
    std::vector<Eigen::VectorXd> xis;
};

ProbeSet make_probes(const ProbeSpec& spec) {
    ProbeSet ps;
    const int n = spec.dim;
    std::size_t total = 1;
    for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(spec.x_points);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Eigen::VectorXd x(n);
        std::size_t rem = flat;
        for (int a = n - 1; a >= 0; --a) {
            const auto i = rem % static_cast<std::size_t>(spec.x_points);
            rem /= static_cast<std::size_t>(spec.x_points);
            x[a] = -0.5 * spec.x_extent + (static_cast<double>(i) + 0.5) * spec.x_extent / spec.x_points;
        }
        ps.xs.push_back(x);
    }

    std::vector<double> radii{0.0};
    const double top = std::log10(spec.xi_cutoff);
    for (int k = -2 * spec.xi_per_decade;; ++k) {
        const double e = static_cast<double>(k) / spec.xi_per_decade;
        if (e >= top) break;
        radii.push_back(std::pow(10.0, e));
    }
    radii.push_back(spec.xi_cutoff);

    std::vector<Eigen::VectorXd> dirs;
    for (int a = 0; a < n; ++a) {
        dirs.push_back(Eigen::VectorXd::Unit(n, a));
        dirs.push_back(-Eigen::VectorXd::Unit(n, a));
    }
    if (n > 1) {
        dirs.push_back(Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n)));
        dirs.push_back(-Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n)));
    }
    ps.xis.push_back(Eigen::VectorXd::Zero(n));
    for (std::size_t r = 1; r < radii.size(); ++r)
        for (const auto& d : dirs) ps.xis.push_back(radii[r] * d);
    return ps;
}

struct BoundEstimate {
    double c_hat = 0.0;
    double disagreement = 0.0;
    bool finite = true;
};

BoundEstimate estimate(const Symbol& sym, const ProbeSet& ps, const std::vector<int>& alpha,
                       const std::vector<int>& gamma) {
    int ax = 0, ag = 0;
    for (int v : alpha) ax += v;
    for (int v : gamma) ag += v;
    BoundEstimate out;
    for (const auto& xi : ps.xis) {
        const double r = xi.norm();
        const double weight = std::pow(1.0 + r, sym.order - ag + sym.type_delta * ax);
        const double hxi = 1e-3 * (1.0 + r);
        const double hx = 1e-3 / std::pow(1.0 + r, sym.type_delta);
        for (const auto& x : ps.xs) {
            const auto d1 = finite_difference(sym, x, xi, alpha, gamma, hx, hxi);
            const auto d2 = finite_difference(sym, x, xi, alpha, gamma, hx / 2, hxi / 2);
            const auto rich = (4.0 * d2 - d1) / 3.0;
            if (!std::isfinite(rich.real()) || !std::isfinite(rich.imag())) out.finite = false;
            // Rounding floor of the half-step stencil; differences below it are indistinguishable from zero.
            const double floor = 10.0 * std::numeric_limits<double>::epsilon() * std::abs(sym(x, xi)) *
                                 std::exp2(2 * (ax + ag) + 1) / (std::pow(hx / 2, ax) * std::pow(hxi / 2, ag));
            if (std::abs(rich) > floor) out.c_hat = std::max(out.c_hat, std::abs(rich) / weight);
            if (std::abs(d1 - d2) > floor) out.disagreement = std::max(out.disagreement, std::abs(d1 - d2) / weight);
        }
    }
    return out;
}

} // namespace

SymbolValidation validate_symbol(const Symbol& sym, const ProbeSpec& probes, int max_order) {
    require(max_order >= 0 && max_order <= 3, Errc::precondition, "max_order must lie in 0..3");
    require(probes.dim >= 1 && probes.x_points >= 1 && probes.xi_per_decade >= 1 && probes.xi_cutoff > 1.0,
            Errc::precondition, "invalid probe specification");
    const int order = std::min(max_order, sym.max_derivative_depth);

    ProbeSpec fine = probes;
    fine.x_points *= 2;
    fine.xi_per_decade *= 2;
    fine.xi_cutoff *= 2.0;
    const auto coarse_set = make_probes(probes);
    const auto fine_set = make_probes(fine);

    SymbolValidation report;
    report.symbol = sym.name;
    report.order = sym.order;
    report.type_delta = sym.type_delta;
    const auto indices = multi_indices(probes.dim, order);
    for (const auto& alpha : indices)
        for (const auto& gamma : indices) {
            const auto c = estimate(sym, coarse_set, alpha, gamma);
            const auto f = estimate(sym, fine_set, alpha, gamma);
            DerivativeBound b;
            b.alpha = alpha;
            b.gamma = gamma;
            b.c_hat = c.c_hat;
            b.c_hat_refined = f.c_hat;
            const double scale = std::max({c.c_hat, f.c_hat, 1e-300});
            b.richardson = std::max(c.disagreement, f.disagreement) / scale;
            const bool finite = c.finite && f.finite && std::isfinite(c.c_hat) && std::isfinite(f.c_hat);
            const bool bounded = f.c_hat <= 1.1 * c.c_hat + 1e-12;
            const bool consistent = b.richardson <= 0.05 || scale <= 1e-12;
            b.stable = finite && bounded && consistent;
            if (!b.stable && report.pass) {
                report.pass = false;
                std::string which = "alpha=(";
                for (int v : alpha) which += std::to_string(v) + ",";
                which.back() = ')';
                which += " gamma=(";
                for (int v : gamma) which += std::to_string(v) + ",";
                which.back() = ')';
                report.reason = which + (!finite ? " non-finite" : !bounded ? " grows under refinement" : " finite differences inconsistent");
            }
            report.bounds.push_back(b);
        }
    return report;
}

GridFunction apply_psido(const Symbol& sym, const GridFunction& f, double freq_cutoff) {
    require(freq_cutoff > 0.0, Errc::precondition, "frequency cutoff must be positive");
    const Grid& g = f.grid;
    const std::size_t size = g.size();
    auto coeffs = f.values;
    fft::forward(coeffs, g.dims());
    const double inv = 1.0 / static_cast<double>(size);

    double total = 0.0, beyond = 0.0;
    std::vector<double> radius(size);
    for (std::size_t k = 0; k < size; ++k) {
        coeffs[k] *= inv;
        radius[k] = g.xi_norm(k);
        const double e = std::norm(coeffs[k]);
        total += e;
        const double cut = smooth_bump(radius[k] / freq_cutoff);
        beyond += e * (1.0 - cut) * (1.0 - cut);
        coeffs[k] *= cut;
    }
    if (total > 0.0 && beyond > 1e-8 * total)
        fail(Errc::cutoff_too_small, "spectral mass beyond the cutoff is " + std::to_string(beyond / total));

    GridFunction out(g);
    auto synthesize = [&](const std::function<std::complex<double>(const Eigen::VectorXd&)>& b) {
        std::vector<std::complex<double>> data(size);
        for (std::size_t k = 0; k < size; ++k) data[k] = coeffs[k] * b(g.xi(k));
        fft::backward(data, g.dims());
        return data;
    };

    if (sym.x_independent) {
        const Eigen::VectorXd origin = Eigen::VectorXd::Zero(g.dim);
        out.values = synthesize([&](const Eigen::VectorXd& xi) { return sym(origin, xi); });
        return out;
    }
    if (sym.separable()) {
        for (const auto& term : sym.terms) {
            const auto part = synthesize(term.b);
            for (std::size_t j = 0; j < size; ++j) out.values[j] += term.a(g.x(j)) * part[j];
        }
        return out;
    }

    // Direct quadrature: f(x_j) = sum_k c_k e^{i xi_k (x_j - x_0)}.
    std::vector<Eigen::VectorXd> xis(size);
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < size; ++k) {
        xis[k] = g.xi(k);
        if (coeffs[k] != 0.0) active.push_back(k);
    }
    const Eigen::VectorXd x0 = g.x(0);
    for (std::size_t j = 0; j < size; ++j) {
        const Eigen::VectorXd x = g.x(j);
        const Eigen::VectorXd shift = x - x0;
        std::complex<double> acc = 0.0;
        for (std::size_t k : active) acc += sym(x, xis[k]) * coeffs[k] * std::polar(1.0, xis[k].dot(shift));
        out.values[j] = acc;
    }
    return out;
}

Symbol compose_lifted_symbol(const Symbol& sym) {
    require(sym.order < 0.0, Errc::precondition, "compose_lifted_symbol needs a negative order");
    const double sigma = sym.order;
    Symbol out = sym;
    out.name = sym.name + "_lifted";
    out.order = 0.0;
    out.evaluate = [inner = sym.evaluate, sigma](const Eigen::VectorXd& x, const Eigen::VectorXd& xi) {
        return inner(x, xi) * bessel_weight(-sigma, xi);
    };
    for (auto& t : out.terms)
        t.b = [inner = t.b, sigma](const Eigen::VectorXd& xi) { return inner(xi) * bessel_weight(-sigma, xi); };
    return out;
}

GridFunction refine_grid(const GridFunction& f, int factor) {
    require(factor >= 1 && (factor & (factor - 1)) == 0, Errc::precondition, "refinement factor must be a power of two");
    const Grid& g = f.grid;
    const Grid fine(g.dim, g.points * factor, g.extent);
    auto data = f.values;
    fft::forward(data, g.dims());
    std::vector<std::complex<double>> padded(fine.size());
    const double scale = std::pow(static_cast<double>(factor), g.dim);
    for (std::size_t k = 0; k < g.size(); ++k) {
        std::size_t rem = k, target = 0;
        std::size_t stride = 1;
        for (int a = g.dim - 1; a >= 0; --a) {
            long idx = static_cast<long>(rem % static_cast<std::size_t>(g.points));
            rem /= static_cast<std::size_t>(g.points);
            if (idx >= g.points / 2) idx += static_cast<long>(fine.points - g.points);
            target += static_cast<std::size_t>(idx) * stride;
            stride *= static_cast<std::size_t>(fine.points);
        }
        padded[target] = data[k] * scale;
    }
    fft::backward(padded, fine.dims());
    GridFunction out(fine);
    const double inv = 1.0 / static_cast<double>(fine.size());
    for (std::size_t j = 0; j < fine.size(); ++j) out.values[j] = padded[j] * inv;
    return out;
}

nlohmann::json BoundednessReport::to_json() const {
    return {{"max_ratio", max_ratio}, {"max_ratio_refined", max_ratio_refined}, {"growth", growth},
            {"evaluated", evaluated}, {"skipped", skipped}, {"verdict", pass ? "PASS" : "FAIL"}};
}

namespace {

double corpus_max_ratio(const Symbol& sym, const BesovParams& params, const std::vector<GridFunction>& corpus,
                        std::size_t& evaluated, std::size_t& skipped) {
    double best = 0.0;
    for (const auto& f : corpus) {
        if (lp_norm(f, INFINITY) == 0.0) {
            ++skipped;
            continue;
        }
        const Grid& g = f.grid;
        const int j_max = static_cast<int>(std::ceil(std::log2(g.nyquist()))) + 1;
        const auto res = build_resolution(j_max, g);
        const auto tf = apply_psido(sym, f, 0.6 * g.nyquist());
        best = std::max(best, besov_norm(tf, params, res) / besov_norm(f, params, res));
        ++evaluated;
    }
    return best;
}

} // namespace

BoundednessReport boundedness_probe(const Symbol& sym, const BesovParams& params, const std::vector<GridFunction>& corpus) {
    require(params.s > 0.0, Errc::precondition, "boundedness probe needs s > 0");
    require(params.p >= 1.0 && params.p == params.q, Errc::precondition, "boundedness probe needs 1 <= p = q");
    BoundednessReport rep;
    std::size_t ev = 0, sk = 0;
    rep.max_ratio = corpus_max_ratio(sym, params, corpus, rep.evaluated, rep.skipped);
    std::vector<GridFunction> fine;
    for (const auto& f : corpus) fine.push_back(refine_grid(f, 2));
    rep.max_ratio_refined = corpus_max_ratio(sym, params, fine, ev, sk);
    if (rep.evaluated == 0) {
        rep.pass = true;
        return rep;
    }
    rep.growth = rep.max_ratio_refined / rep.max_ratio - 1.0;
    rep.pass = std::isfinite(rep.max_ratio_refined) && rep.growth <= 0.1;
    return rep;
}

} // namespace fracspec
