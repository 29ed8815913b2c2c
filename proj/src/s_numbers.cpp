#include "fracspec/s_numbers.hpp"

#include "fracspec/error.hpp"

#include <algorithm>
#include <cmath>

namespace fracspec {

std::string to_string(SKind kind) {
    switch (kind) {
    case SKind::approximation: return "approximation";
    case SKind::entropy_upper: return "entropy-upper";
    case SKind::entropy_lower: return "entropy-lower";
    case SKind::entropy_exact: return "entropy-exact";
    }
    return "unknown";
}

double SNumberSequence::at(std::size_t k) const {
    require(k >= 1, Errc::precondition, "s-numbers are indexed from 1");
    if (k <= values.size()) return values[k - 1];
    if (kind == SKind::approximation) return 0.0;
    fail(Errc::precondition, "entropy number index " + std::to_string(k) + " beyond the computed range");
}

bool SNumberSequence::nonincreasing() const {
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] > values[k - 1]) return false;
    return true;
}

nlohmann::json SNumberSequence::to_json() const {
    return {{"kind", to_string(kind)}, {"values", values}, {"context", context}};
}

SNumberSequence approximation_numbers_hilbert(const Eigen::MatrixXcd& matrix) {
    SNumberSequence out;
    out.kind = SKind::approximation;
    out.context = {{"norms", "l2->l2"}, {"rows", matrix.rows()}, {"cols", matrix.cols()}, {"method", "svd"}};
    if (matrix.size() == 0) return out;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(matrix);
    const auto& sv = svd.singularValues();
    out.values.assign(sv.data(), sv.data() + sv.size());
    return out;
}

SNumberSequence approximation_numbers_diagonal(const std::vector<double>& sigma, double p) {
    require(p >= 1.0, Errc::precondition, "p must lie in [1, inf]");
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        require(sigma[k] >= 0.0, Errc::precondition, "diagonal entries must be nonnegative");
        if (k > 0) require(sigma[k] <= sigma[k - 1], Errc::precondition, "diagonal must be nonincreasing");
    }
    return {SKind::approximation, sigma,
            {{"norms", std::isinf(p) ? std::string("linf->linf") : "l" + std::to_string(p) + "->same"},
             {"method", "diagonal closed form"}}};
}

void AuditReport::record(std::size_t k, std::size_t l, double lhs, double rhs, double tol) {
    ++evaluated;
    k_hi = std::max(k_hi, k);
    const double scale = std::max(std::abs(rhs), std::abs(lhs));
    if (scale > tol && scale > 0.0) worst_slack = std::min(worst_slack, (rhs - lhs) / scale);
    if (lhs > rhs + tol) {
        pass = false;
        violations.push_back({k, l, lhs, rhs});
    }
}

nlohmann::json AuditReport::to_json() const {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& x : violations) v.push_back({{"k", x.k}, {"l", x.l}, {"lhs", x.lhs}, {"rhs", x.rhs}});
    nlohmann::json j = {{"check", check},
                        {"k_range", {k_lo, k_hi}},
                        {"worst_slack", std::isfinite(worst_slack) ? nlohmann::json(worst_slack) : nlohmann::json(nullptr)},
                        {"verdict", pass ? "PASS" : "FAIL"},
                        {"evaluated", evaluated},
                        {"violations", v}};
    if (!note.empty()) j["note"] = note;
    return j;
}

std::vector<AuditReport> carl_audit(const std::vector<double>& eigen_moduli, const SNumberSequence& entropy_upper) {
    for (std::size_t k = 1; k < eigen_moduli.size(); ++k)
        require(eigen_moduli[k] <= eigen_moduli[k - 1], Errc::precondition, "eigenvalue moduli must be nonincreasing");
    AuditReport plain;
    plain.check = "carl";
    AuditReport refined;
    refined.check = "carl_geometric_mean";
    const auto& e = entropy_upper.values;
    const std::size_t range = e.size();
    plain.k_hi = refined.k_hi = 0;
    if (range == 0 || eigen_moduli.empty()) {
        plain.note = refined.note = "vacuous: empty spectrum or no entropy bounds";
        return {plain, refined};
    }
    double log_prod = 0.0;
    bool zero = false;
    for (std::size_t k = 1; k <= range; ++k) {
        const double lam = k <= eigen_moduli.size() ? eigen_moduli[k - 1] : 0.0;
        const double tol = 1e-12 * std::max(lam, e[k - 1]);
        plain.record(k, 0, lam, std::sqrt(2.0) * e[k - 1], tol);

        if (lam == 0.0) zero = true;
        else log_prod += std::log(lam);
        const double gm = zero ? 0.0 : std::exp(log_prod / static_cast<double>(k));
        double rhs = INFINITY;
        for (std::size_t m = 1; m <= range; ++m)
            rhs = std::min(rhs, std::exp2(static_cast<double>(m - 1) / (2.0 * static_cast<double>(k))) * e[m - 1]);
        refined.record(k, 0, gm, rhs, 1e-12 * std::max(gm, rhs));
    }
    return {plain, refined};
}

double entropy_ideal_quasinorm(const std::vector<double>& e, double p, double q) {
    require(p > 0.0 && q > 0.0, Errc::precondition, "p and q must be positive");
    double acc = 0.0;
    for (std::size_t k = 1; k <= e.size(); ++k) {
        const double kk = static_cast<double>(k);
        if (std::isinf(q)) acc = std::max(acc, e[k - 1] * std::pow(kk, 1.0 / p));
        else acc += std::pow(e[k - 1], q) * std::pow(kk, q / p - 1.0);
    }
    return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = 2.0 * uniform01(rng) - 1.0;
    return m;
}

namespace {

double operator_norm(const Eigen::MatrixXd& m, double p) {
    if (m.size() == 0) return 0.0;
    if (p == 2.0) return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()[0];
    if (std::isinf(p)) return m.cwiseAbs().rowwise().sum().maxCoeff();
    if (p == 1.0) return m.cwiseAbs().colwise().sum().maxCoeff();
    fail(Errc::precondition, "exact operator norm available for p in {1, 2, inf} only");
}

int random_dim(std::mt19937_64& rng, int max_dim) {
    return 1 + static_cast<int>(uniform01(rng) * max_dim) % max_dim;
}

} // namespace

std::vector<AuditReport> composition_law_audit(const CompositionSpec& spec) {
    require(spec.triples >= 0 && spec.max_dim >= 1, Errc::precondition, "invalid composition audit spec");
    std::mt19937_64 rng(spec.seed);
    AuditReport duality;
    duality.check = "a_duality";
    AuditReport rst;
    rst.check = "a_composition_RST";
    AuditReport st;
    st.check = "a_composition_ST";
    duality.note = "|a_k(T*) - a_k(T)| against 1e-10 * max(1, |T|)";

    auto a = [](const Eigen::MatrixXd& m) { return approximation_numbers_hilbert(m.cast<std::complex<double>>()); };
    const auto kmax = static_cast<std::size_t>(spec.max_dim);
    for (int t = 0; t < spec.triples; ++t) {
        const int d0 = random_dim(rng, spec.max_dim), d1 = random_dim(rng, spec.max_dim);
        const int d2 = random_dim(rng, spec.max_dim), d3 = random_dim(rng, spec.max_dim);
        const Eigen::MatrixXd r = random_matrix(d0, d1, rng);
        const Eigen::MatrixXd s = random_matrix(d1, d2, rng);
        const Eigen::MatrixXd tt = random_matrix(d2, d3, rng);
        const auto as = a(s), at = a(tt), ar = a(r);
        const auto ast = a(s * tt), arst = a(r * s * tt);
        for (const Eigen::MatrixXd* m : {&r, &s, &tt}) {
            const auto fwd = a(*m), adj = a(m->transpose());
            const double tol = 1e-10 * std::max(1.0, fwd.at(1));
            for (std::size_t k = 1; k <= kmax; ++k) {
                const double diff = std::abs(fwd.at(k) - adj.at(k));
                duality.record(k, 0, diff, tol, 0.0);
            }
        }
        const double nr = ar.at(1), nt = at.at(1);
        for (std::size_t k = 1; k <= kmax; ++k) {
            const double rhs = nr * as.at(k) * nt;
            rst.record(k, 0, arst.at(k), rhs, 1e-10 * std::max(1.0, rhs));
            for (std::size_t l = 1; l + k - 1 <= kmax; ++l) {
                const double rhs2 = as.at(k) * at.at(l);
                st.record(k + l - 1, l, ast.at(k + l - 1), rhs2, 1e-10 * std::max(1.0, rhs2));
            }
        }
    }

    AuditReport ent_rst;
    ent_rst.check = "e_composition_RST";
    AuditReport ent_st;
    ent_st.check = "e_composition_ST";
    ent_rst.note = "lower(e_k(RST)) <= |R| upper(e_k(S)) |T|";
    ent_st.note = "lower(e_{k+l-1}(ST)) <= upper(e_k(S)) upper(e_l(T))";
    const double ps[] = {2.0, INFINITY, 1.0};
    const auto ek = static_cast<std::size_t>(spec.entropy_k_max);
    for (int t = 0; t < spec.entropy_triples; ++t) {
        const double p = ps[t % 3];
        const int d0 = random_dim(rng, 3), d1 = random_dim(rng, 3), d2 = random_dim(rng, 3), d3 = random_dim(rng, 3);
        const Eigen::MatrixXd r = random_matrix(d0, d1, rng);
        const Eigen::MatrixXd s = random_matrix(d1, d2, rng);
        const Eigen::MatrixXd tt = random_matrix(d2, d3, rng);
        const NormPair np{p, p};
        auto bounds = [&](const Eigen::MatrixXd& m) {
            return entropy_numbers_bruteforce(m.cast<std::complex<double>>(), spec.entropy_k_max, np, ScalarField::real,
                                              spec.entropy_options);
        };
        const auto bs = bounds(s), bt = bounds(tt), bst = bounds(s * tt), brst = bounds(r * s * tt);
        const double nr = operator_norm(r, p), nt = operator_norm(tt, p);
        for (std::size_t k = 1; k <= ek; ++k) {
            const double rhs = nr * bs.upper.at(k) * nt;
            ent_rst.record(k, 0, brst.lower.at(k), rhs, 1e-12 * std::max(1.0, rhs));
            for (std::size_t l = 1; l + k - 1 <= ek; ++l) {
                const double rhs2 = bs.upper.at(k) * bt.upper.at(l);
                ent_st.record(k + l - 1, l, bst.lower.at(k + l - 1), rhs2, 1e-12 * std::max(1.0, rhs2));
            }
        }
    }
    return {duality, rst, st, ent_rst, ent_st};
}

std::vector<AuditReport> carl_corpus_audit(const CarlCorpusSpec& spec) {
    require(spec.matrices >= 0 && spec.max_dim >= 1, Errc::precondition, "invalid Carl corpus spec");
    std::mt19937_64 rng(spec.seed);
    AuditReport plain;
    plain.check = "carl";
    AuditReport refined;
    refined.check = "carl_geometric_mean";
    std::size_t brute = 0;
    for (int t = 0; t < spec.matrices; ++t) {
        const int d = random_dim(rng, spec.max_dim);
        const Eigen::MatrixXd re = random_matrix(d, d, rng), im = random_matrix(d, d, rng);
        const Eigen::MatrixXcd a = re.cast<std::complex<double>>() + std::complex<double>(0.0, 1.0) * im.cast<std::complex<double>>();

        const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(a, false);
        std::vector<double> moduli;
        for (Eigen::Index i = 0; i < d; ++i) moduli.push_back(std::abs(eig.eigenvalues()[i]));
        std::sort(moduli.begin(), moduli.end(), std::greater<>());

        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues();
        auto upper = entropy_upper_hilbert({sv.data(), sv.data() + sv.size()}, spec.k_max, ScalarField::complex);
        if (2 * d <= 3) {
            const auto bf = entropy_numbers_bruteforce(a, spec.k_max, {2.0, 2.0}, ScalarField::complex, spec.entropy_options);
            for (std::size_t k = 0; k < upper.values.size(); ++k) upper.values[k] = std::min(upper.values[k], bf.upper.values[k]);
            ++brute;
        }
        for (const auto& r : carl_audit(moduli, upper)) {
            AuditReport& dst = r.check == "carl" ? plain : refined;
            dst.evaluated += r.evaluated;
            dst.k_hi = std::max(dst.k_hi, r.k_hi);
            dst.worst_slack = std::min(dst.worst_slack, r.worst_slack);
            dst.pass = dst.pass && r.pass;
            dst.violations.insert(dst.violations.end(), r.violations.begin(), r.violations.end());
        }
    }
    plain.note = refined.note = std::to_string(spec.matrices) + " complex matrices, " + std::to_string(brute) +
                                " with brute-force covering";
    return {plain, refined};
}

nlohmann::json entropy_duality_report(const std::vector<double>& sigma, double p, int k_max, const EntropyOptions& options) {
    require(!sigma.empty() && sigma.size() <= 3, Errc::dimension_too_large, "duality report supports up to 3 entries");
    require(p >= 1.0, Errc::precondition, "p must be >= 1");
    const double dual = std::isinf(p) ? 1.0 : p == 1.0 ? INFINITY : p / (p - 1.0);
    const auto n = static_cast<Eigen::Index>(sigma.size());
    Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) diag(i, i) = sigma[static_cast<std::size_t>(i)];
    const auto fwd = entropy_numbers_bruteforce(diag, k_max, {p, p}, ScalarField::real, options);
    const auto adj = entropy_numbers_bruteforce(diag.transpose(), k_max, {dual, dual}, ScalarField::real, options);
    nlohmann::json rows = nlohmann::json::array();
    for (int k = 1; k <= k_max; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        rows.push_back({{"k", k},
                        {"T_lower", fwd.lower.at(kk)},
                        {"T_upper", fwd.upper.at(kk)},
                        {"Tdual_lower", adj.lower.at(kk)},
                        {"Tdual_upper", adj.upper.at(kk)},
                        {"estimate", entropy_estimate_diagonal(sigma, k)}});
    }
    auto pj = [](double v) { return std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v); };
    return {{"check", "entropy_duality"}, {"verdict", "REPORT-ONLY"}, {"sigma", sigma},
            {"p", pj(p)}, {"p_dual", pj(dual)}, {"rows", rows}};
}

} // namespace fracspec
