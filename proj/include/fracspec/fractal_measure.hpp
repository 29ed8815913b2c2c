#pragma once
//
// Self-similar d-sets and quadrature rules for their normalized Hausdorff measure.
//
// A d-set is realized as the attractor of an iterated function system of
// similitudes S_i(x) = r_i R_i x + t_i.  The level-L quadrature places one
// atom in every level-L cell S_{w_1} o ... o S_{w_L}(Gamma), anchored at the
// image of the attractor barycenter, with weight m^{-L}.
//

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fracspec {

using Point = Eigen::VectorXd;

struct Similitude {
    double ratio = 0.5;
    Eigen::MatrixXd rotation;   // orthogonal n x n
    Eigen::VectorXd translation;

    Point apply(const Point& x) const { return ratio * (rotation * x) + translation; }
};

// Declared open set condition; only level-1 cell disjointness is verified.
struct SeparationCertificate {
    bool open_set_condition = false;
    std::string open_set;
};

struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    double diameter() const { return (hi - lo).norm(); }
    double distance(const Point& x) const;
    bool interiors_overlap(const Box& other, double tol) const;
};

class SimilitudeIFS {
public:
    SimilitudeIFS(int ambient_dim, std::vector<Similitude> maps, SeparationCertificate certificate = {});

    int ambient_dim() const { return ambient_dim_; }
    std::size_t size() const { return maps_.size(); }
    const std::vector<Similitude>& maps() const { return maps_; }
    const SeparationCertificate& certificate() const { return certificate_; }

    bool equal_ratios() const;
    // Similarity dimension: the root of sum_i r_i^d = 1.
    double dimension() const { return dimension_; }
    // Fixed point of the weight-averaged affine map x -> (1/m) sum_i S_i(x).
    Point barycenter() const;
    // Axis-aligned box guaranteed to contain the attractor.
    const Box& hull() const { return hull_; }

private:
    int ambient_dim_;
    std::vector<Similitude> maps_;
    SeparationCertificate certificate_;
    double dimension_ = 0.0;
    Box hull_;
};

// Equal-ratio IFS without rotations; level-1 cells must not overlap.
SimilitudeIFS build_cantor_like(int n, int m, double r, const std::vector<Point>& translations);

inline constexpr std::size_t kDefaultAtomBudget = std::size_t{1} << 22;

class FractalMeasure {
public:
    FractalMeasure(SimilitudeIFS ifs, int level, Eigen::MatrixXd atoms, std::vector<double> weights);

    const SimilitudeIFS& ifs() const { return ifs_; }
    int level() const { return level_; }
    int ambient_dim() const { return ifs_.ambient_dim(); }
    double dimension() const { return ifs_.dimension(); }
    std::size_t size() const { return weights_.size(); }

    // Column j is atom gamma_j; columns follow lexicographic word order.
    const Eigen::MatrixXd& atoms() const { return atoms_; }
    Point atom(std::size_t j) const { return atoms_.col(static_cast<Eigen::Index>(j)); }
    const std::vector<double>& weights() const { return weights_; }

    double hull_diameter() const { return ifs_.hull().diameter(); }
    // Diameter bound of a level-L cell.
    double cell_diameter() const;

    // Word of atom j, letters separated by '.' when m > 10.
    std::string word(std::size_t j) const;

private:
    SimilitudeIFS ifs_;
    int level_;
    Eigen::MatrixXd atoms_;
    std::vector<double> weights_;
};

// Level-0 yields the single barycenter atom.
FractalMeasure quadrature(const SimilitudeIFS& ifs, int level, std::size_t atom_budget = kDefaultAtomBudget);

// mu_L(B(center, radius)) / radius^d.
double ball_measure_ratio(const FractalMeasure& measure, const Point& center, double radius);

double lp_norm_on_gamma(std::span<const std::complex<double>> values, double p, const FractalMeasure& measure);

// CSV columns: word, x1..xn, weight.
void write_atoms_csv(std::ostream& out, const FractalMeasure& measure);

} // namespace fracspec
