#include "fracspec/fractal_measure.hpp"

#include "fracspec/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace fracspec {

double Box::distance(const Point& x) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double gap = std::max({lo[i] - x[i], x[i] - hi[i], 0.0});
        acc += gap * gap;
    }
    return std::sqrt(acc);
}

bool Box::interiors_overlap(const Box& other, double tol) const {
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        double overlap = std::min(hi[i], other.hi[i]) - std::max(lo[i], other.lo[i]);
        if (overlap <= tol) return false;
    }
    return true;
}

namespace {

double solve_moran(const std::vector<Similitude>& maps, int n) {
    auto f = [&](double d) {
        double acc = 0.0;
        for (const auto& s : maps) acc += std::pow(s.ratio, d);
        return acc - 1.0;
    };
    // f is decreasing in d; f(0) = m - 1 > 0.
    double lo = 0.0, hi = 1.0;
    while (f(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 64.0 * n + 64.0) break;
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

Box image_box(const Similitude& s, const Box& b) {
    // Bounding box of the similitude image of a box, via its center and half-widths.
    Eigen::VectorXd c = 0.5 * (b.lo + b.hi);
    Eigen::VectorXd h = 0.5 * (b.hi - b.lo);
    Eigen::VectorXd ic = s.apply(c);
    Eigen::VectorXd ih = s.ratio * (s.rotation.cwiseAbs() * h);
    return Box{ic - ih, ic + ih};
}

} // namespace

SimilitudeIFS::SimilitudeIFS(int ambient_dim, std::vector<Similitude> maps, SeparationCertificate certificate)
    : ambient_dim_(ambient_dim), maps_(std::move(maps)), certificate_(std::move(certificate)) {
    require(ambient_dim_ >= 1, Errc::precondition, "ambient dimension must be >= 1");
    require(maps_.size() >= 2, Errc::precondition, "an IFS needs at least two maps");
    for (auto& s : maps_) {
        require(s.ratio > 0.0 && s.ratio < 1.0, Errc::precondition, "similitude ratios must lie in (0,1)");
        if (s.rotation.size() == 0) s.rotation = Eigen::MatrixXd::Identity(ambient_dim_, ambient_dim_);
        require(s.rotation.rows() == ambient_dim_ && s.rotation.cols() == ambient_dim_, Errc::shape_mismatch,
                "rotation must be n x n");
        require(s.translation.size() == ambient_dim_, Errc::shape_mismatch, "translation must have n entries");
        Eigen::MatrixXd gram = s.rotation.transpose() * s.rotation;
        require((gram - Eigen::MatrixXd::Identity(ambient_dim_, ambient_dim_)).cwiseAbs().maxCoeff() < 1e-10,
                Errc::precondition, "rotation is not orthogonal");
    }

    if (equal_ratios())
        dimension_ = std::log(static_cast<double>(maps_.size())) / std::log(1.0 / maps_.front().ratio);
    else
        dimension_ = solve_moran(maps_, ambient_dim_);
    if (!(dimension_ > 0.0 && dimension_ < ambient_dim_))
        fail(Errc::dimension_out_of_range,
             "similarity dimension d = " + std::to_string(dimension_) + " is not in (0, " +
                 std::to_string(ambient_dim_) + ")");

    // Enclosing ball around the barycenter, then refined by level-q images.
    Point c = barycenter();
    double rmax = 0.0, spread = 0.0;
    for (const auto& s : maps_) {
        rmax = std::max(rmax, s.ratio);
        spread = std::max(spread, (s.apply(c) - c).norm());
    }
    double radius = spread / (1.0 - rmax);

    int q = 0;
    std::size_t count = 1;
    while (count * maps_.size() <= 4096) {
        count *= maps_.size();
        ++q;
    }
    std::vector<Point> pts{c};
    std::vector<double> scale{1.0};
    for (int level = 0; level < q; ++level) {
        std::vector<Point> next;
        std::vector<double> next_scale;
        next.reserve(pts.size() * maps_.size());
        for (const auto& s : maps_)
            for (std::size_t j = 0; j < pts.size(); ++j) {
                next.push_back(s.apply(pts[j]));
                next_scale.push_back(scale[j] * s.ratio);
            }
        pts = std::move(next);
        scale = std::move(next_scale);
    }
    hull_.lo = Eigen::VectorXd::Constant(ambient_dim_, INFINITY);
    hull_.hi = Eigen::VectorXd::Constant(ambient_dim_, -INFINITY);
    for (std::size_t j = 0; j < pts.size(); ++j) {
        hull_.lo = hull_.lo.cwiseMin((pts[j].array() - scale[j] * radius).matrix());
        hull_.hi = hull_.hi.cwiseMax((pts[j].array() + scale[j] * radius).matrix());
    }
}

bool SimilitudeIFS::equal_ratios() const {
    return std::all_of(maps_.begin(), maps_.end(), [&](const Similitude& s) {
        return std::abs(s.ratio - maps_.front().ratio) <= 1e-15;
    });
}

Point SimilitudeIFS::barycenter() const {
    const double inv_m = 1.0 / static_cast<double>(maps_.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(ambient_dim_, ambient_dim_);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ambient_dim_);
    for (const auto& s : maps_) {
        a -= inv_m * s.ratio * s.rotation;
        b += inv_m * s.translation;
    }
    return a.partialPivLu().solve(b);
}

SimilitudeIFS build_cantor_like(int n, int m, double r, const std::vector<Point>& translations) {
    require(n >= 1, Errc::precondition, "n must be >= 1");
    require(m >= 2, Errc::precondition, "m must be >= 2");
    require(r > 0.0 && r < 1.0, Errc::precondition, "ratio must lie in (0,1)");
    require(static_cast<int>(translations.size()) == m, Errc::shape_mismatch, "need exactly m translations");
    for (std::size_t i = 0; i < translations.size(); ++i) {
        require(translations[i].size() == n, Errc::shape_mismatch, "translation has wrong dimension");
        for (std::size_t j = 0; j < i; ++j)
            require((translations[i] - translations[j]).norm() > 0.0, Errc::precondition,
                    "translations must be pairwise distinct");
    }

    double d = std::log(static_cast<double>(m)) / std::log(1.0 / r);
    if (d >= n)
        fail(Errc::dimension_out_of_range,
             "d = log m / log(1/r) = " + std::to_string(d) + " is not below n = " + std::to_string(n));

    std::vector<Similitude> maps;
    for (const auto& t : translations) maps.push_back({r, Eigen::MatrixXd::Identity(n, n), t});
    SimilitudeIFS ifs(n, std::move(maps), {true, "interior of the level-0 hull box"});

    const auto& hull = ifs.hull();
    std::vector<Box> cells;
    for (const auto& s : ifs.maps()) cells.push_back(image_box(s, hull));
    const double tol = 1e-12 * std::max(1.0, hull.diameter());
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (cells[i].interiors_overlap(cells[j], tol))
                fail(Errc::overlap_detected,
                     "level-1 cells " + std::to_string(j) + " and " + std::to_string(i) + " intersect");
    return ifs;
}

FractalMeasure::FractalMeasure(SimilitudeIFS ifs, int level, Eigen::MatrixXd atoms, std::vector<double> weights)
    : ifs_(std::move(ifs)), level_(level), atoms_(std::move(atoms)), weights_(std::move(weights)) {
    require(atoms_.rows() == ifs_.ambient_dim(), Errc::shape_mismatch, "atom dimension mismatch");
    require(static_cast<std::size_t>(atoms_.cols()) == weights_.size(), Errc::shape_mismatch,
            "one weight per atom required");
}

double FractalMeasure::cell_diameter() const {
    double rmax = 0.0;
    for (const auto& s : ifs_.maps()) rmax = std::max(rmax, s.ratio);
    return std::pow(rmax, level_) * hull_diameter();
}

std::string FractalMeasure::word(std::size_t j) const {
    const std::size_t m = ifs_.size();
    std::vector<std::size_t> letters(static_cast<std::size_t>(level_));
    for (int k = level_ - 1; k >= 0; --k) {
        letters[static_cast<std::size_t>(k)] = j % m;
        j /= m;
    }
    std::string out;
    for (std::size_t k = 0; k < letters.size(); ++k) {
        if (m > 10 && k > 0) out += '.';
        out += std::to_string(letters[k]);
    }
    return out;
}

FractalMeasure quadrature(const SimilitudeIFS& ifs, int level, std::size_t atom_budget) {
    require(level >= 0, Errc::precondition, "level must be >= 0");
    require(ifs.equal_ratios(), Errc::precondition, "quadrature supports equal-ratio IFS only");
    const std::size_t m = ifs.size();
    std::size_t count = 1;
    for (int k = 0; k < level; ++k) {
        if (count > atom_budget / m)
            fail(Errc::budget_exceeded, "m^L = " + std::to_string(m) + "^" + std::to_string(level) +
                                            " exceeds the atom budget " + std::to_string(atom_budget));
        count *= m;
    }
    if (count > atom_budget)
        fail(Errc::budget_exceeded, "m^L = " + std::to_string(count) + " exceeds the atom budget");

    const int n = ifs.ambient_dim();
    Eigen::MatrixXd pts(n, 1);
    pts.col(0) = ifs.barycenter();
    // Word w = i w' maps to column i * m^{k-1} + index(w').
    for (int k = 1; k <= level; ++k) {
        const Eigen::Index prev = pts.cols();
        Eigen::MatrixXd next(n, prev * static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < m; ++i) {
            const auto& s = ifs.maps()[i];
            Eigen::MatrixXd lin = s.ratio * s.rotation;
            next.middleCols(static_cast<Eigen::Index>(i) * prev, prev) = (lin * pts).colwise() + s.translation;
        }
        pts = std::move(next);
    }
    std::vector<double> weights(count, 1.0 / static_cast<double>(count));
    return FractalMeasure(ifs, level, std::move(pts), std::move(weights));
}

double ball_measure_ratio(const FractalMeasure& measure, const Point& center, double radius) {
    require(radius > 0.0, Errc::precondition, "radius must be positive");
    require(center.size() == measure.ambient_dim(), Errc::shape_mismatch, "center has wrong dimension");
    if (measure.ifs().hull().distance(center) > measure.hull_diameter()) return 0.0;
    if (measure.cell_diameter() > radius / 10.0)
        fail(Errc::resolution, "level " + std::to_string(measure.level()) + " cell diameter " +
                                   std::to_string(measure.cell_diameter()) + " exceeds radius/10");
    double mass = 0.0;
    const auto& atoms = measure.atoms();
    for (Eigen::Index j = 0; j < atoms.cols(); ++j)
        if ((atoms.col(j) - center).norm() <= radius) mass += measure.weights()[static_cast<std::size_t>(j)];
    return mass / std::pow(radius, measure.dimension());
}

double lp_norm_on_gamma(std::span<const std::complex<double>> values, double p, const FractalMeasure& measure) {
    require(values.size() == measure.size(), Errc::shape_mismatch, "one value per atom required");
    require(p >= 1.0, Errc::precondition, "p must be >= 1");
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) acc += measure.weights()[j] * std::pow(std::abs(values[j]), p);
    return std::pow(acc, 1.0 / p);
}

void write_atoms_csv(std::ostream& out, const FractalMeasure& measure) {
    out << "word";
    for (int i = 1; i <= measure.ambient_dim(); ++i) out << ",x" << i;
    out << ",weight\n";
    char buf[64];
    for (std::size_t j = 0; j < measure.size(); ++j) {
        out << measure.word(j);
        for (int i = 0; i < measure.ambient_dim(); ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g", measure.atoms()(i, static_cast<Eigen::Index>(j)));
            out << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g\n", measure.weights()[j]);
        out << buf;
    }
}

} // namespace fracspec
