#include "fracspec/fractal_operator.hpp"

#include "fracspec/error.hpp"
#include "fracspec/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracspec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double resolve_spacing(const FractalMeasure& measure, const FrequencyGrid& freq) {
    require(freq.cutoff > 0.0, Errc::precondition, "frequency cutoff must be positive");
    const double diam = std::max(measure.hull_diameter(), 1e-300);
    const double hmax = std::numbers::pi / (4.0 * diam);
    if (freq.spacing <= 0.0) return hmax;
    require(freq.spacing <= hmax * (1.0 + 1e-12), Errc::resolution,
            "xi spacing " + fmt(freq.spacing) + " exceeds pi/(4 diam) = " + fmt(hmax));
    return freq.spacing;
}

// Lattice points h*l, l in Z^n, inside the support |xi| < 1.5 Xi of the smooth cutoff.
std::vector<Eigen::VectorXd> frequency_points(int n, double h, double cutoff) {
    const long half = static_cast<long>(std::ceil(1.5 * cutoff / h));
    const long width = 2 * half + 1;
    long total = 1;
    for (int a = 0; a < n; ++a) total *= width;
    std::vector<Eigen::VectorXd> out;
    for (long flat = 0; flat < total; ++flat) {
        Eigen::VectorXd xi(n);
        long rem = flat;
        for (int a = n - 1; a >= 0; --a) {
            xi[a] = h * static_cast<double>(rem % width - half);
            rem /= width;
        }
        if (smooth_bump(xi.norm() / cutoff) > 0.0) out.push_back(xi);
    }
    return out;
}

struct LatticeTransform {
    std::size_t size = 0; // FFT length M
    double h = 0.0;       // xi spacing 2 pi / (delta M)
};

LatticeTransform lattice_transform(const AtomLattice& lat, double hmax, double cutoff) {
    require(1.5 * cutoff <= std::numbers::pi / lat.delta, Errc::resolution,
            "cutoff " + fmt(cutoff) + " aliases on the atom lattice (1.5 Xi must not exceed pi/delta = " +
                fmt(std::numbers::pi / lat.delta) + ")");
    const auto [lo, hi] = std::minmax_element(lat.index.begin(), lat.index.end());
    const double span = static_cast<double>(*hi - *lo);
    std::size_t m = 2;
    while (static_cast<double>(m) < kTwoPi / (lat.delta * hmax) || static_cast<double>(m) < 2.0 * span + 1.0) m *= 2;
    require(m <= (std::size_t{1} << 26), Errc::budget_exceeded, "lattice FFT length exceeds 2^26");
    return {m, kTwoPi / (lat.delta * static_cast<double>(m))};
}

// K(m) = (2 pi)^{-1} h sum_l c(xi_l) e^{2 pi i m l / M} for the lattice FFT of length M.
std::vector<std::complex<double>> lattice_kernel(const LatticeTransform& lt, double cutoff,
                                                 const std::function<std::complex<double>(double)>& c) {
    std::vector<std::complex<double>> data(lt.size);
    const long half = static_cast<long>(lt.size / 2);
    Eigen::VectorXd xi(1);
    for (std::size_t i = 0; i < lt.size; ++i) {
        const long l = static_cast<long>(i) < half ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(lt.size);
        const double x = lt.h * static_cast<double>(l);
        const double cut = smooth_bump(std::abs(x) / cutoff);
        if (cut > 0.0) data[i] = c(x) * cut;
    }
    fft::backward(data, {static_cast<int>(lt.size)});
    const double scale = lt.h / kTwoPi;
    for (auto& v : data) v *= scale;
    return data;
}

std::size_t wrap(long m, std::size_t size) {
    const long s = static_cast<long>(size);
    return static_cast<std::size_t>(((m % s) + s) % s);
}

// Estimated size of the cut-off xi integrand tail beyond Xi relative to the diagonal scale.
double cutoff_tail(const Symbol& sym, const Eigen::VectorXd& x, int n, double h, double cutoff) {
    double tail = 0.0;
    for (const auto& xi : frequency_points(n, h, cutoff)) {
        if (xi.norm() <= cutoff) continue;
        tail += std::abs(sym(x, xi)) * smooth_bump(xi.norm() / cutoff);
    }
    return tail * std::pow(h / kTwoPi, n);
}

} // namespace

void DiscretizedOperator::update_symmetric_flag() {
    if (matrix.rows() != matrix.cols() || matrix.size() == 0) {
        symmetric = matrix.size() != 0 && matrix.rows() == matrix.cols();
        return;
    }
    const double scale = matrix.cwiseAbs().maxCoeff();
    const double asym = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    symmetric = asym <= 1e-10 * scale;
}

void check_window(double value, double lo, double hi, const std::string& what) {
    if (!(value > lo && value <= hi))
        fail(Errc::window_violation, what + ": need " + fmt(lo) + " < " + fmt(value) + " <= " + fmt(hi));
}

std::vector<std::complex<double>> fourier_of_fmu(std::span<const std::complex<double>> values,
                                                 const FractalMeasure& measure,
                                                 const std::vector<Eigen::VectorXd>& xi) {
    require(values.size() == measure.size(), Errc::shape_mismatch, "one value per atom required");
    const double c = std::pow(kTwoPi, -0.5 * measure.ambient_dim());
    std::vector<std::complex<double>> out(xi.size());
    for (std::size_t l = 0; l < xi.size(); ++l) {
        require(xi[l].size() == measure.ambient_dim(), Errc::shape_mismatch, "frequency has wrong dimension");
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j)
            acc += measure.weights()[j] * values[j] * std::polar(1.0, -measure.atoms().col(static_cast<Eigen::Index>(j)).dot(xi[l]));
        out[l] = c * acc;
    }
    return out;
}

std::optional<AtomLattice> detect_lattice(const FractalMeasure& measure) {
    if (measure.ambient_dim() != 1 || measure.size() < 2) return std::nullopt;
    std::vector<double> xs(measure.size());
    for (std::size_t j = 0; j < xs.size(); ++j) xs[j] = measure.atoms()(0, static_cast<Eigen::Index>(j));
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    double delta = INFINITY;
    for (std::size_t j = 1; j < sorted.size(); ++j)
        if (sorted[j] > sorted[j - 1]) delta = std::min(delta, sorted[j] - sorted[j - 1]);
    if (!std::isfinite(delta)) return std::nullopt;
    AtomLattice lat;
    lat.origin = sorted.front();
    lat.delta = delta;
    lat.index.resize(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double t = (xs[j] - lat.origin) / delta;
        const double r = std::round(t);
        if (std::abs(t - r) > 1e-6) return std::nullopt;
        lat.index[j] = static_cast<long>(r);
    }
    return lat;
}

DiscretizedOperator assemble_trace_operator(const FractalMeasure& measure, double s, double p,
                                            const FrequencyGrid& freq, std::size_t entry_budget) {
    const int n = measure.ambient_dim();
    const double d = measure.dimension();
    check_window(s, (n - d) / p, n / p, "trace window (n-d)/p < s <= n/p");
    const double h = resolve_spacing(measure, freq);
    const auto xis = frequency_points(n, h, freq.cutoff);
    if (measure.size() * xis.size() > entry_budget)
        fail(Errc::budget_exceeded, "trace matrix " + std::to_string(measure.size()) + " x " +
                                        std::to_string(xis.size()) + " exceeds the entry budget");

    DiscretizedOperator op;
    op.matrix.resize(static_cast<Eigen::Index>(measure.size()), static_cast<Eigen::Index>(xis.size()));
    const double c = std::pow(kTwoPi, -0.5 * n) * std::pow(h, 0.5 * n);
    for (std::size_t l = 0; l < xis.size(); ++l) {
        const double mode = c * bessel_weight(-s, xis[l]) * std::sqrt(smooth_bump(xis[l].norm() / freq.cutoff));
        for (std::size_t j = 0; j < measure.size(); ++j) {
            const double phase = measure.atoms().col(static_cast<Eigen::Index>(j)).dot(xis[l]);
            op.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) =
                std::sqrt(measure.weights()[j]) * std::polar(mode, phase);
        }
    }
    op.domain = {"fourier-modes", xis.size(), 2.0, s};
    op.codomain = {"atom-space", measure.size(), p, 0.0};
    op.assembly = {{"operator", "trace"}, {"s", s}, {"p", p}, {"level", measure.level()},
                   {"atoms", measure.size()}, {"cutoff", freq.cutoff}, {"xi_spacing", h}, {"modes", xis.size()}};
    op.update_symmetric_flag();
    return op;
}

DiscretizedOperator trace_gram(const FractalMeasure& measure, double s, double p, const FrequencyGrid& freq) {
    const int n = measure.ambient_dim();
    const double d = measure.dimension();
    check_window(s, (n - d) / p, n / p, "trace window (n-d)/p < s <= n/p");
    const double hmax = resolve_spacing(measure, freq);
    const auto size = static_cast<Eigen::Index>(measure.size());

    DiscretizedOperator op;
    op.domain = op.codomain = {"atom-space", measure.size(), p, 0.0};
    op.assembly = {{"operator", "trace_gram"}, {"s", s}, {"p", p}, {"level", measure.level()},
                   {"atoms", measure.size()}, {"cutoff", freq.cutoff}};

    if (auto lat = detect_lattice(measure)) {
        const auto lt = lattice_transform(*lat, hmax, freq.cutoff);
        const auto kernel = lattice_kernel(lt, freq.cutoff, [s](double xi) {
            return std::complex<double>(std::pow(1.0 + xi * xi, -s));
        });
        Eigen::MatrixXd gram(size, size);
        for (Eigen::Index j = 0; j < size; ++j)
            for (Eigen::Index k = 0; k <= j; ++k) {
                const double v = std::sqrt(measure.weights()[static_cast<std::size_t>(j)] *
                                           measure.weights()[static_cast<std::size_t>(k)]) *
                                 kernel[wrap(lat->index[static_cast<std::size_t>(j)] - lat->index[static_cast<std::size_t>(k)], lt.size)].real();
                gram(j, k) = gram(k, j) = v;
            }
        op.matrix = gram.cast<std::complex<double>>();
        op.assembly["method"] = "lattice-fft";
        op.assembly["xi_spacing"] = lt.h;
        op.assembly["fft_length"] = lt.size;
        op.assembly["lattice_delta"] = lat->delta;
    } else {
        const auto t = assemble_trace_operator(measure, s, p, freq);
        op.matrix = t.matrix * t.matrix.adjoint();
        op.matrix = 0.5 * (op.matrix + op.matrix.adjoint()).eval();
        op.assembly["method"] = "direct";
        op.assembly["xi_spacing"] = t.assembly["xi_spacing"];
    }
    op.symmetric = true;
    return op;
}

double self_interaction(const FractalMeasure& measure, const BesselKernel& kernel, int depth) {
    const auto& ifs = measure.ifs();
    const double m = static_cast<double>(ifs.size());
    const double r = ifs.maps().front().ratio;
    const int n = ifs.ambient_dim();
    const double a = kernel.order();
    const int level = measure.level();
    while (depth > 0 && std::pow(m, depth) > 1024.0) --depth;

    // Sub-atoms of one level-L cell, rescaled to the cell size.
    const auto sub = quadrature(ifs, depth);
    const double scale = std::pow(r, level);
    const double ws = 1.0 / static_cast<double>(sub.size()); // relative to the cell mass
    double pairs = 0.0;
    for (std::size_t i = 0; i < sub.size(); ++i)
        for (std::size_t j = 0; j < sub.size(); ++j)
            if (i != j) pairs += ws * ws * kernel(scale * (sub.atom(i) - sub.atom(j)).norm());

    double coincident = kernel.regular_part();
    if (kernel.singular()) {
        // Energy of rho^{a-n} (or -log rho) on Gamma by self-similarity at level 1.
        int q = 1;
        while (std::pow(m, q + 1) <= 2048.0) ++q;
        const auto coarse = quadrature(ifs, q);
        const std::size_t block = coarse.size() / ifs.size();
        const double wq = 1.0 / static_cast<double>(coarse.size());
        double off = 0.0;
        for (std::size_t i = 0; i < coarse.size(); ++i)
            for (std::size_t j = 0; j < coarse.size(); ++j) {
                if (i / block == j / block) continue;
                const double rho = (coarse.atom(i) - coarse.atom(j)).norm();
                off += wq * wq * (kernel.logarithmic() ? -std::log(rho) : std::pow(rho, a - n));
            }
        const double sum_w2 = 1.0 / m; // m * (1/m)^2
        const double cell = std::pow(r, level + depth);
        if (kernel.logarithmic()) {
            const double energy = (off - sum_w2 * std::log(r)) / (1.0 - sum_w2);
            coincident += kernel.local_coefficient() * (energy - std::log(cell));
        } else {
            const double energy = off / (1.0 - sum_w2 * std::pow(r, a - n));
            coincident += kernel.local_coefficient() * std::pow(cell, a - n) * energy;
        }
    }
    // (1/w) * w^2 * [sum over sub-atom pairs + sum over coincident cells], with w the cell mass.
    const double w = measure.weights().front();
    return w * (pairs + static_cast<double>(sub.size()) * ws * ws * coincident);
}

DiscretizedOperator assemble_dmu_kernel(const FractalMeasure& measure, double s) {
    const int n = measure.ambient_dim();
    const double d = measure.dimension();
    check_window(2.0 * s, n - d, n, "D^mu_s window n-d < 2s <= n");
    const BesselKernel kernel(2.0 * s, n);
    const double c = std::pow(kTwoPi, -0.5 * n);
    const double diag_value = self_interaction(measure, kernel);
    const auto size = static_cast<Eigen::Index>(measure.size());

    Eigen::MatrixXd k(size, size);
    const auto& atoms = measure.atoms();
    const auto& w = measure.weights();
    for (Eigen::Index j = 0; j < size; ++j) {
        const double wj = w[static_cast<std::size_t>(j)];
        k(j, j) = c * diag_value;
        for (Eigen::Index l = 0; l < j; ++l) {
            const double v = c * std::sqrt(wj * w[static_cast<std::size_t>(l)]) * kernel((atoms.col(j) - atoms.col(l)).norm());
            k(j, l) = k(l, j) = v;
        }
    }

    DiscretizedOperator op;
    op.matrix = k.cast<std::complex<double>>();
    op.domain = op.codomain = {"atom-space", measure.size(), 2.0, 0.0};
    op.symmetric = true;
    op.assembly = {{"operator", "dmu_kernel"}, {"s", s}, {"kernel_order", 2.0 * s}, {"level", measure.level()},
                   {"atoms", measure.size()}, {"self_interaction", diag_value},
                   {"self_interaction_depth", kSelfInteractionDepth}, {"constant", "(2pi)^(-n/2)"}};
    return op;
}

DiscretizedOperator assemble_tmu_galerkin(const Symbol& sym, double s, double p, const FractalMeasure& measure,
                                          const FrequencyGrid& freq) {
    const int n = measure.ambient_dim();
    const double d = measure.dimension();
    check_window(s * p, n - d, n, "Main Theorem window n-d < sp <= n");
    if (std::abs(sym.order + s * p) > 1e-9)
        fail(Errc::window_violation, "symbol order " + fmt(sym.order) + " must equal -sp = " + fmt(-s * p));
    const double hmax = resolve_spacing(measure, freq);
    const auto size = static_cast<Eigen::Index>(measure.size());
    const auto& atoms = measure.atoms();
    const auto& w = measure.weights();

    DiscretizedOperator op;
    op.domain = op.codomain = {"atom-space", measure.size(), p, 0.0};
    op.assembly = {{"operator", "galerkin"}, {"symbol", sym.name}, {"symbol_params", sym.params},
                   {"s", s}, {"p", p}, {"order", sym.order}, {"level", measure.level()},
                   {"atoms", measure.size()}, {"cutoff", freq.cutoff}};
    op.matrix = Eigen::MatrixXcd::Zero(size, size);
    double diag_scale = 0.0;
    double h_used = hmax;

    if (auto lat = detect_lattice(measure)) {
        const auto lt = lattice_transform(*lat, hmax, freq.cutoff);
        h_used = lt.h;
        op.assembly["method"] = "lattice-fft";
        op.assembly["fft_length"] = lt.size;
        op.assembly["lattice_delta"] = lat->delta;
        Eigen::VectorXd xi(1);

        if (sym.x_independent || sym.separable()) {
            std::vector<SeparableTerm> terms = sym.terms;
            if (terms.empty() || sym.x_independent) {
                const Eigen::VectorXd origin = Eigen::VectorXd::Zero(1);
                terms = {{[](const Eigen::VectorXd&) { return std::complex<double>(1.0); },
                          [&sym, origin](const Eigen::VectorXd& v) { return sym(origin, v); }}};
            }
            bool hermitian = terms.size() == 1;
            Eigen::VectorXd amp(size);
            for (const auto& term : terms) {
                const auto kernel = lattice_kernel(lt, freq.cutoff, [&](double x) {
                    xi[0] = x;
                    return term.b(xi);
                });
                double kmax = 0.0, kimag = 0.0;
                for (const auto& v : kernel) {
                    kmax = std::max(kmax, std::abs(v));
                    kimag = std::max(kimag, std::abs(v.imag()));
                }
                if (kimag > 1e-12 * kmax) hermitian = false;
                for (Eigen::Index j = 0; j < size; ++j) {
                    const auto aj = term.a(atoms.col(j));
                    if (!(aj.imag() == 0.0 && aj.real() > 0.0)) hermitian = false;
                    amp[j] = aj.real();
                    for (Eigen::Index k = 0; k < size; ++k)
                        op.matrix(j, k) += aj * kernel[wrap(lat->index[static_cast<std::size_t>(j)] - lat->index[static_cast<std::size_t>(k)], lt.size)] *
                                           w[static_cast<std::size_t>(k)];
                }
                diag_scale = std::max(diag_scale, std::abs(kernel[0]));
                if (hermitian) {
                    // M = diag(a) K diag(w) is similar to D^{1/2} K D^{1/2}, D = a w.
                    Eigen::VectorXd root(size);
                    for (Eigen::Index j = 0; j < size; ++j) root[j] = std::sqrt(amp[j] * w[static_cast<std::size_t>(j)]);
                    Eigen::MatrixXd hs(size, size);
                    for (Eigen::Index j = 0; j < size; ++j)
                        for (Eigen::Index k = 0; k <= j; ++k)
                            hs(j, k) = hs(k, j) = root[j] * root[k] *
                                                  kernel[wrap(lat->index[static_cast<std::size_t>(j)] - lat->index[static_cast<std::size_t>(k)], lt.size)].real();
                    op.hermitian_similar = std::move(hs);
                }
            }
        } else {
            if (measure.size() * lt.size > (std::size_t{1} << 28))
                fail(Errc::budget_exceeded, "row-wise Galerkin assembly needs " + std::to_string(measure.size()) + " FFTs of length " +
                                                std::to_string(lt.size));
            for (Eigen::Index j = 0; j < size; ++j) {
                const Eigen::VectorXd x = atoms.col(j);
                const auto kernel = lattice_kernel(lt, freq.cutoff, [&](double v) {
                    xi[0] = v;
                    return sym(x, xi);
                });
                diag_scale = std::max(diag_scale, std::abs(kernel[0]));
                for (Eigen::Index k = 0; k < size; ++k)
                    op.matrix(j, k) = kernel[wrap(lat->index[static_cast<std::size_t>(j)] - lat->index[static_cast<std::size_t>(k)], lt.size)] *
                                      w[static_cast<std::size_t>(k)];
            }
        }
    } else {
        const auto xis = frequency_points(n, hmax, freq.cutoff);
        if (measure.size() * measure.size() * xis.size() > (std::size_t{1} << 33))
            fail(Errc::budget_exceeded, "direct Galerkin assembly over " + std::to_string(xis.size()) + " modes exceeds the budget");
        op.assembly["method"] = "direct";
        Eigen::MatrixXcd left(size, static_cast<Eigen::Index>(xis.size()));
        Eigen::MatrixXcd right(size, static_cast<Eigen::Index>(xis.size()));
        for (std::size_t l = 0; l < xis.size(); ++l) {
            const double cut = smooth_bump(xis[l].norm() / freq.cutoff);
            for (Eigen::Index j = 0; j < size; ++j) {
                const double phase = atoms.col(j).dot(xis[l]);
                left(j, static_cast<Eigen::Index>(l)) = sym(atoms.col(j), xis[l]) * cut * std::polar(1.0, phase);
                right(j, static_cast<Eigen::Index>(l)) = std::polar(1.0, phase);
            }
        }
        op.matrix = std::pow(hmax / kTwoPi, n) * (left * right.adjoint());
        for (Eigen::Index k = 0; k < size; ++k) op.matrix.col(k) *= w[static_cast<std::size_t>(k)];
        for (Eigen::Index j = 0; j < size; ++j) diag_scale = std::max(diag_scale, std::abs(op.matrix(j, j)) / w[static_cast<std::size_t>(j)]);
    }
    op.assembly["xi_spacing"] = h_used;

    const double tail = cutoff_tail(sym, atoms.col(0), n, h_used, freq.cutoff);
    op.assembly["cutoff_tail"] = tail;
    op.assembly["warnings"] = nlohmann::json::array();
    if (tail > 1e-6 * diag_scale)
        op.assembly["warnings"].push_back("cutoff-insufficient: xi integrand tail " + fmt(tail) + " exceeds 1e-6 of entry scale " +
                                          fmt(diag_scale));
    op.update_symmetric_flag();
    return op;
}

} // namespace fracspec
