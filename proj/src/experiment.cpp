#include "fracspec/experiment.hpp"

#include "fracspec/error.hpp"
#include "fracspec/io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace fracspec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Object reader that rejects keys nobody asked for.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) fail(Errc::config, path_ + " must be an object");
    }

    const json* get(const std::string& key) {
        used_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    double number(const std::string& key, double fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (v->is_string() && (*v == "inf" || *v == "infinity")) return INFINITY;
        if (!v->is_number()) fail(Errc::config, where(key) + " must be a number");
        return v->get<double>();
    }

    long integer(const std::string& key, long fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) fail(Errc::config, where(key) + " must be an integer");
        return v->get<long>();
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_boolean()) fail(Errc::config, where(key) + " must be true or false");
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_string()) fail(Errc::config, where(key) + " must be a string");
        return v->get<std::string>();
    }

    Section child(const std::string& key) {
        static const json empty = json::object();
        const json* v = get(key);
        return Section(v ? *v : empty, where(key));
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!used_.count(it.key())) fail(Errc::config, "unknown key '" + where(it.key()) + "'");
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

double parse_ratio(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto text = v.get<std::string>();
        const auto slash = text.find('/');
        try {
            std::size_t used = 0;
            if (slash == std::string::npos) {
                const double r = std::stod(text, &used);
                if (used == text.size()) return r;
            } else {
                const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
                std::size_t ua = 0, ub = 0;
                const double num = std::stod(a, &ua), den = std::stod(b, &ub);
                if (ua == a.size() && ub == b.size() && den != 0.0) return num / den;
            }
        } catch (const std::exception&) {
        }
    }
    fail(Errc::config, where + " must be a number or a fraction \"a/b\"");
}

Eigen::MatrixXcd parse_matrix(const json& v, const std::string& where) {
    auto real_rows = [&](const json& rows) {
        if (!rows.is_array() || rows.empty()) fail(Errc::config, where + " must be a nonempty array of rows");
        const auto r = rows.size(), c = rows.front().is_array() ? rows.front().size() : 0;
        if (c == 0) fail(Errc::config, where + " rows must be nonempty arrays");
        Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        for (std::size_t i = 0; i < r; ++i) {
            if (!rows[i].is_array() || rows[i].size() != c) fail(Errc::config, where + " rows must have equal length");
            for (std::size_t j = 0; j < c; ++j) {
                if (!rows[i][j].is_number()) fail(Errc::config, where + " entries must be numbers");
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
            }
        }
        return m;
    };
    if (v.is_array()) return real_rows(v).cast<std::complex<double>>();
    Section sec(v, where);
    const json* re = sec.get("re");
    const json* im = sec.get("im");
    sec.finish();
    if (!re) fail(Errc::config, where + ".re is required");
    const Eigen::MatrixXd a = real_rows(*re);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    if (im) {
        b = real_rows(*im);
        if (b.rows() != a.rows() || b.cols() != a.cols()) fail(Errc::config, where + ".im shape differs from .re");
    }
    return a.cast<std::complex<double>>() + std::complex<double>(0.0, 1.0) * b.cast<std::complex<double>>();
}

std::vector<EntropyLabCase> default_lab_cases() {
    Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(2, 2);
    diag(0, 0) = 1.0;
    diag(1, 1) = 0.5;
    Eigen::MatrixXcd rot(2, 2);
    rot << 0.0, -1.0, 1.0, 0.0;
    Eigen::MatrixXcd scalar(1, 1);
    scalar(0, 0) = std::complex<double>(0.6, 0.8);
    return {{diag, {2.0, 2.0}, ScalarField::real},
            {diag, {INFINITY, INFINITY}, ScalarField::real},
            {rot, {2.0, 2.0}, ScalarField::real},
            {scalar, {2.0, 2.0}, ScalarField::complex}};
}

void check_windows(const ExperimentConfig& c) {
    const int n = c.fractal.n;
    const double d = c.dimension, s = c.analysis.s, p = c.analysis.p;
    require(p >= 1.0 && std::isfinite(p), Errc::config, "analysis.p must be finite and >= 1");
    require(s > 0.0, Errc::config, "analysis.s must be positive");
    require(c.analysis.freq.cutoff > 0.0, Errc::config, "analysis.cutoff must be positive");
    switch (c.analysis.op) {
    case OperatorKind::dmu_kernel:
        require(p == 2.0, Errc::config, "operator dmu_kernel needs p = 2");
        check_window(2.0 * s, n - d, n, "Theorem 2.4 window n-d < 2s <= n");
        break;
    case OperatorKind::galerkin: {
        check_window(s * p, n - d, n, "Main Theorem window n-d < sp <= n");
        const Symbol sym = symbol_from_catalog(c.analysis.symbol, c.analysis.symbol_params);
        if (std::abs(sym.order + s * p) > 1e-9)
            fail(Errc::window_violation, "symbol order " + io::format_double(sym.order) + " must equal -sp = " +
                                             io::format_double(-s * p));
        break;
    }
    case OperatorKind::trace:
        check_window(s, (n - d) / p, n / p, "trace window (n-d)/p < s <= n/p");
        break;
    }
}

std::string strip_code(const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    return msg;
}

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        const std::string msg = strip_code(e);
        if (msg.rfind("stage ", 0) == 0) throw;
        throw Error(e.code(), "stage " + name + ": " + msg);
    }
}

// Files written by one run; removed again unless the run completes.
class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) fail(Errc::io, "cannot create output directory " + dir_.string());
    }
    Artifacts(const Artifacts&) = delete;
    Artifacts& operator=(const Artifacts&) = delete;
    ~Artifacts() {
        if (committed_) return;
        for (const auto& f : files_) {
            std::error_code ec;
            fs::remove(f, ec);
        }
    }

    fs::path add(const std::string& name) {
        files_.push_back(dir_ / name);
        return files_.back();
    }

    std::vector<fs::path> commit() {
        committed_ = true;
        return files_;
    }

private:
    fs::path dir_;
    std::vector<fs::path> files_;
    bool committed_ = false;
};

std::string kind_name(OperatorKind k) {
    switch (k) {
    case OperatorKind::dmu_kernel: return "dmu_kernel";
    case OperatorKind::galerkin: return "galerkin";
    case OperatorKind::trace: return "trace";
    }
    return "?";
}

json parameters(const ExperimentConfig& c, const FractalMeasure& mu) {
    return {{"n", c.fractal.n},
            {"m", c.fractal.m},
            {"ratio", c.fractal.ratio},
            {"dimension", c.dimension},
            {"level", mu.level()},
            {"atoms", mu.size()},
            {"operator", kind_name(c.analysis.op)},
            {"s", c.analysis.s},
            {"p", c.analysis.p},
            {"symbol", c.analysis.symbol},
            {"symbol_params", c.analysis.symbol_params},
            {"cutoff", c.analysis.freq.cutoff}};
}

std::string plot_script(const ExperimentConfig& c, const SpectrumReport& rep) {
    std::ostringstream py;
    py << "# fracspec " << kVersion << " config=" << c.hash << "\n"
       << "# log-log plot of |lambda_k| with the fitted and theoretical slopes\n"
       << "import csv\nimport os\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n"
       << "here = os.path.dirname(os.path.abspath(__file__))\n"
       << "with open(os.path.join(here, \"spectrum.csv\")) as fh:\n"
       << "    rows = list(csv.DictReader(line for line in fh if not line.startswith(\"#\")))\n"
       << "k = [int(r[\"k\"]) for r in rows if float(r[\"modulus\"]) > 0]\n"
       << "mod = [float(r[\"modulus\"]) for r in rows if float(r[\"modulus\"]) > 0]\n\n"
       << "slope = " << io::format_double(rep.fit.slope) << "\n"
       << "intercept = " << io::format_double(rep.fit.intercept) << "\n"
       << "theory = " << io::format_double(rep.theoretical_exponent) << "\n"
       << "k_lo, k_hi = " << rep.fit.k_lo << ", " << rep.fit.k_hi << "\n\n"
       << "anchor = k_lo ** slope\n"
       << "ks = list(range(k_lo, k_hi + 1))\n"
       << "fig, ax = plt.subplots(figsize=(6, 4.5))\n"
       << "ax.loglog(k, mod, \".\", ms=2, label=\"|lambda_k|\")\n"
       << "ax.loglog(ks, [2.718281828459045 ** intercept * x ** slope for x in ks], label=\"fit %.4f\" % slope)\n"
       << "ax.loglog(ks, [2.718281828459045 ** intercept * anchor * (x / k_lo) ** theory / k_lo ** slope for x in ks],\n"
       << "          \"--\", label=\"theory %.4f\" % theory)\n"
       << "ax.set_xlabel(\"k\")\nax.set_ylabel(\"|lambda_k|\")\nax.legend()\n"
       << "fig.tight_layout()\nfig.savefig(os.path.join(here, \"spectrum.png\"), dpi=150)\n";
    return py.str();
}

double max_relative_gap(const std::vector<double>& a, const std::vector<double>& b, std::size_t count) {
    double gap = 0.0;
    for (std::size_t k = 0; k < count && k < a.size() && k < b.size(); ++k)
        gap = std::max(gap, std::abs(a[k] - b[k]) / std::max(std::abs(b[k]), 1e-300));
    return gap;
}

json pvalue(double p) { return std::isinf(p) ? json("inf") : json(p); }

} // namespace

json ExperimentConfig::provenance() const {
    return {{"artifact", "fracspec"}, {"version", std::string(kVersion)}, {"config_hash", hash}, {"seed", seed}, {"name", name}};
}

ExperimentConfig parse_config(json doc, const ConfigOverrides& overrides) {
    if (!doc.is_object()) fail(Errc::config, "config must be a JSON object");
    if (overrides.tolerance) {
        if (!doc.contains("fit")) doc["fit"] = json::object();
        if (!doc["fit"].is_object()) fail(Errc::config, "config.fit must be an object");
        doc["fit"]["tolerance"] = *overrides.tolerance;
    }
    ExperimentConfig c;
    Section top(doc, "config");
    const json* version = top.get("schema_version");
    if (!version || !version->is_number_integer() || version->get<int>() != kSchemaVersion)
        fail(Errc::config, "config.schema_version must be " + std::to_string(kSchemaVersion));
    c.name = top.string("name", c.name);
    c.output_dir = top.string("output_dir", c.output_dir.string());
    if (overrides.output_dir) c.output_dir = *overrides.output_dir;
    const long seed = top.integer("seed", static_cast<long>(c.seed));
    require(seed >= 0, Errc::config, "config.seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(seed);
    const long budget = top.integer("atom_budget", static_cast<long>(c.atom_budget));
    require(budget >= 1, Errc::config, "config.atom_budget must be positive");
    c.atom_budget = static_cast<std::size_t>(budget);

    {
        Section f = top.child("fractal");
        c.fractal.n = static_cast<int>(f.integer("n", c.fractal.n));
        c.fractal.m = static_cast<int>(f.integer("m", c.fractal.m));
        if (const json* r = f.get("ratio")) c.fractal.ratio = parse_ratio(*r, f.where("ratio"));
        c.fractal.level = static_cast<int>(f.integer("level", c.fractal.level));
        require(c.fractal.n >= 1 && c.fractal.n <= 3, Errc::config, "fractal.n must lie in 1..3");
        require(c.fractal.m >= 2, Errc::config, "fractal.m must be >= 2");
        require(c.fractal.level >= 0, Errc::config, "fractal.level must be >= 0");
        if (const json* t = f.get("translations")) {
            if (!t->is_array()) fail(Errc::config, "fractal.translations must be an array");
            for (const auto& v : *t) {
                Eigen::VectorXd x(c.fractal.n);
                if (v.is_number() && c.fractal.n == 1) {
                    x[0] = v.get<double>();
                } else if (v.is_array() && v.size() == static_cast<std::size_t>(c.fractal.n)) {
                    for (int i = 0; i < c.fractal.n; ++i) {
                        if (!v[static_cast<std::size_t>(i)].is_number())
                            fail(Errc::config, "fractal.translations entries must be numbers");
                        x[i] = v[static_cast<std::size_t>(i)].get<double>();
                    }
                } else {
                    fail(Errc::config, "each translation must have n = " + std::to_string(c.fractal.n) + " coordinates");
                }
                c.fractal.translations.push_back(x);
            }
        } else if (c.fractal.n == 1 && c.fractal.m == 2) {
            Eigen::VectorXd a(1), b(1);
            a << 0.0;
            b << 1.0 - c.fractal.ratio;
            c.fractal.translations = {a, b};
        } else {
            fail(Errc::config, "fractal.translations is required");
        }
        if (c.fractal.translations.size() != static_cast<std::size_t>(c.fractal.m))
            fail(Errc::config, "fractal.translations must list m = " + std::to_string(c.fractal.m) + " points");
        f.finish();
    }
    {
        Section a = top.child("analysis");
        const std::string op = a.string("operator", "dmu_kernel");
        if (op == "dmu_kernel") c.analysis.op = OperatorKind::dmu_kernel;
        else if (op == "galerkin") c.analysis.op = OperatorKind::galerkin;
        else if (op == "trace") c.analysis.op = OperatorKind::trace;
        else fail(Errc::config, "analysis.operator must be dmu_kernel, galerkin or trace");
        c.analysis.s = a.number("s", c.analysis.s);
        c.analysis.p = a.number("p", c.analysis.p);
        c.analysis.freq.cutoff = a.number("cutoff", c.analysis.freq.cutoff);
        c.analysis.freq.spacing = a.number("xi_spacing", c.analysis.freq.spacing);
        c.analysis.cross_check = a.boolean("cross_check", c.analysis.cross_check);
        if (a.get("symbol")) {
            Section sym = a.child("symbol");
            c.analysis.symbol = sym.string("name", c.analysis.symbol);
            if (const json* p = sym.get("params")) c.analysis.symbol_params = *p;
            sym.finish();
        } else {
            // Bessel multiplier of the assembled operator: w_{-sp}, w_{-2s} for D^mu_s, w_{-s} for the trace.
            const double sigma = c.analysis.op == OperatorKind::galerkin   ? -c.analysis.s * c.analysis.p
                                 : c.analysis.op == OperatorKind::dmu_kernel ? -2.0 * c.analysis.s
                                                                             : -c.analysis.s;
            c.analysis.symbol_params = {{"sigma", sigma}};
        }
        a.finish();
    }
    {
        Section f = top.child("fit");
        const long lo = f.integer("k_lo", static_cast<long>(c.fit.window.k_lo));
        const long hi = f.integer("k_hi", static_cast<long>(c.fit.window.k_hi));
        require(lo >= 1 && hi >= 0 && (hi == 0 || hi > lo), Errc::config, "fit window needs 1 <= k_lo < k_hi (or k_hi = 0)");
        c.fit.window = {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
        c.fit.tolerance = f.number("tolerance", c.fit.tolerance);
        require(c.fit.tolerance > 0.0, Errc::config, "fit.tolerance must be positive");
        const std::string mode = f.string("mode", "two_sided");
        if (mode == "two_sided") c.fit.mode = VerdictMode::two_sided;
        else if (mode == "upper") c.fit.mode = VerdictMode::upper;
        else fail(Errc::config, "fit.mode must be two_sided or upper");
        f.finish();
    }
    {
        Section s = top.child("snumbers");
        c.snumbers.tolerance = s.number("tolerance", c.snumbers.tolerance);
        c.snumbers.transference_tolerance = s.number("transference_tolerance", c.snumbers.transference_tolerance);
        c.snumbers.transference_k = static_cast<std::size_t>(s.integer("transference_k", 50));
        const long lo = s.integer("k_lo", 10), hi = s.integer("k_hi", 200);
        require(lo >= 1 && hi > lo, Errc::config, "snumbers window needs 1 <= k_lo < k_hi");
        c.snumbers.window = {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
        s.finish();
    }
    {
        Section a = top.child("audits");
        c.audits.spectrum_carl = a.boolean("spectrum_carl", c.audits.spectrum_carl);
        c.audits.spectrum_k_max = static_cast<int>(a.integer("spectrum_k_max", c.audits.spectrum_k_max));
        require(c.audits.spectrum_k_max >= 1 && c.audits.spectrum_k_max <= 20, Errc::config,
                "audits.spectrum_k_max must lie in 1..20");
        c.audits.duality_report = a.boolean("duality_report", c.audits.duality_report);
        {
            Section k = a.child("corpus");
            c.audits.corpus = k.boolean("enabled", c.audits.corpus);
            c.audits.carl.matrices = static_cast<int>(k.integer("matrices", c.audits.carl.matrices));
            c.audits.carl.max_dim = static_cast<int>(k.integer("max_dim", c.audits.carl.max_dim));
            c.audits.carl.k_max = static_cast<int>(k.integer("k_max", c.audits.carl.k_max));
            require(c.audits.carl.matrices >= 0 && c.audits.carl.max_dim >= 1 && c.audits.carl.k_max >= 1 &&
                        c.audits.carl.k_max <= 7,
                    Errc::config, "audits.corpus needs matrices >= 0, max_dim >= 1, k_max in 1..7");
            k.finish();
        }
        {
            Section l = a.child("composition");
            c.audits.composition = l.boolean("enabled", c.audits.composition);
            c.audits.laws.triples = static_cast<int>(l.integer("triples", c.audits.laws.triples));
            c.audits.laws.max_dim = static_cast<int>(l.integer("max_dim", c.audits.laws.max_dim));
            c.audits.laws.entropy_triples = static_cast<int>(l.integer("entropy_triples", c.audits.laws.entropy_triples));
            c.audits.laws.entropy_k_max = static_cast<int>(l.integer("entropy_k_max", c.audits.laws.entropy_k_max));
            require(c.audits.laws.triples >= 0 && c.audits.laws.max_dim >= 1 && c.audits.laws.entropy_triples >= 0 &&
                        c.audits.laws.entropy_k_max >= 1 && c.audits.laws.entropy_k_max <= 7,
                    Errc::config, "audits.composition has out-of-range sizes");
            l.finish();
        }
        a.finish();
    }
    c.audits.carl.seed = c.seed;
    c.audits.laws.seed = c.seed + 1;
    {
        Section e = top.child("entropy_lab");
        c.entropy_lab.k_max = static_cast<int>(e.integer("k_max", c.entropy_lab.k_max));
        require(c.entropy_lab.k_max >= 1 && c.entropy_lab.k_max <= 7, Errc::config, "entropy_lab.k_max must lie in 1..7");
        {
            Section g = e.child("grid");
            auto& o = c.entropy_lab.options;
            o.points_1d = static_cast<int>(g.integer("points_1d", o.points_1d));
            o.points_2d = static_cast<int>(g.integer("points_2d", o.points_2d));
            o.points_3d = static_cast<int>(g.integer("points_3d", o.points_3d));
            o.lloyd_iterations = static_cast<int>(g.integer("lloyd_iterations", o.lloyd_iterations));
            require(o.points_1d >= 3 && o.points_2d >= 3 && o.points_3d >= 3 && o.lloyd_iterations >= 0, Errc::config,
                    "entropy_lab.grid sizes must be >= 3");
            g.finish();
        }
        if (const json* cases = e.get("cases")) {
            if (!cases->is_array()) fail(Errc::config, "entropy_lab.cases must be an array");
            for (std::size_t i = 0; i < cases->size(); ++i) {
                Section cs((*cases)[i], "entropy_lab.cases[" + std::to_string(i) + "]");
                EntropyLabCase lab;
                const json* m = cs.get("matrix");
                if (!m) fail(Errc::config, cs.where("matrix") + " is required");
                lab.matrix = parse_matrix(*m, cs.where("matrix"));
                lab.norms.p_domain = cs.number("p_domain", 2.0);
                lab.norms.p_codomain = cs.number("p_codomain", lab.norms.p_domain);
                require(lab.norms.p_domain >= 1.0 && lab.norms.p_codomain >= 1.0, Errc::config,
                        "entropy_lab norms need p >= 1");
                const std::string field = cs.string("field", "real");
                if (field == "real") lab.field = ScalarField::real;
                else if (field == "complex") lab.field = ScalarField::complex;
                else fail(Errc::config, cs.where("field") + " must be real or complex");
                if (lab.field == ScalarField::real && lab.matrix.imag().cwiseAbs().maxCoeff() != 0.0)
                    fail(Errc::config, cs.where("matrix") + " has imaginary entries but field is real");
                cs.finish();
                c.entropy_lab.cases.push_back(lab);
            }
        } else {
            c.entropy_lab.cases = default_lab_cases();
        }
        e.finish();
    }
    {
        Section v = top.child("validate");
        auto& pr = c.validate.probes;
        pr.dim = c.fractal.n;
        pr.x_extent = v.number("x_extent", pr.x_extent);
        pr.xi_cutoff = v.number("xi_cutoff", pr.xi_cutoff);
        pr.x_points = static_cast<int>(v.integer("x_points", pr.x_points));
        pr.xi_per_decade = static_cast<int>(v.integer("xi_per_decade", pr.xi_per_decade));
        c.validate.max_order = static_cast<int>(v.integer("max_order", c.validate.max_order));
        if (v.get("declared_delta")) {
            c.validate.declared_delta = v.number("declared_delta", 0.0);
            require(*c.validate.declared_delta >= 0.0 && *c.validate.declared_delta <= 1.0, Errc::config,
                    "validate.declared_delta must lie in [0, 1]");
        }
        require(pr.x_extent > 0.0 && pr.xi_cutoff > 1.0 && pr.x_points >= 1 && pr.xi_per_decade >= 1 &&
                    c.validate.max_order >= 0 && c.validate.max_order <= 3,
                Errc::config, "validate has out-of-range probe settings");
        v.finish();
    }
    {
        Section cv = top.child("convergence");
        if (const json* lv = cv.get("levels")) {
            if (!lv->is_array()) fail(Errc::config, "convergence.levels must be an array");
            for (const auto& x : *lv) {
                if (!x.is_number_integer() || x.get<int>() < 0) fail(Errc::config, "convergence.levels must be integers >= 0");
                c.levels.push_back(x.get<int>());
            }
        }
        cv.finish();
    }
    top.finish();

    try {
        c.dimension = build_ifs(c.fractal).dimension();
    } catch (const Error& e) {
        if (e.is_config_error()) throw;
        fail(Errc::config, "fractal: " + std::string(e.what()));
    }
    std::error_code ec;
    if (fs::exists(c.output_dir, ec) && !fs::is_directory(c.output_dir, ec))
        fail(Errc::config, "output_dir " + c.output_dir.string() + " exists and is not a directory");
    check_windows(c);

    json canonical = doc;
    canonical.erase("output_dir");
    c.hash = io::fnv1a_hex(canonical.dump());
    return c;
}

ExperimentConfig load_config(const fs::path& path, const ConfigOverrides& overrides) {
    std::string text;
    try {
        text = io::read_text(path);
    } catch (const Error& e) {
        fail(Errc::config, strip_code(e));
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        fail(Errc::config, path.string() + ": " + e.what());
    }
    return parse_config(std::move(doc), overrides);
}

SimilitudeIFS build_ifs(const FractalSpec& spec) {
    return build_cantor_like(spec.n, spec.m, spec.ratio, spec.translations);
}

FractalMeasure build_measure(const ExperimentConfig& config, int level) {
    return stage("quadrature at level " + std::to_string(level),
                 [&] { return quadrature(build_ifs(config.fractal), level, config.atom_budget); });
}

DiscretizedOperator build_operator(const ExperimentConfig& config, const FractalMeasure& measure) {
    return stage("assemble", [&] {
        const auto& a = config.analysis;
        switch (a.op) {
        case OperatorKind::dmu_kernel: return assemble_dmu_kernel(measure, a.s);
        case OperatorKind::galerkin:
            return assemble_tmu_galerkin(symbol_from_catalog(a.symbol, a.symbol_params), a.s, a.p, measure, a.freq);
        case OperatorKind::trace: return trace_gram(measure, a.s, a.p, a.freq);
        }
        fail(Errc::config, "unknown operator");
    });
}

double expected_exponent(const ExperimentConfig& config) {
    const auto& a = config.analysis;
    if (a.op == OperatorKind::trace) return 2.0 * trace_exponent(config.fractal.n, config.dimension, a.s, a.p);
    return theoretical_exponent(config.fractal.n, config.dimension, a.s, a.p);
}

RunResult run_spectrum(const ExperimentConfig& config) {
    Artifacts art(config.output_dir);
    const auto mu = build_measure(config, config.fractal.level);
    const auto op = build_operator(config, mu);
    const double expected = expected_exponent(config);
    const auto rep = stage("eigensolve and fit", [&] {
        return make_report(op, expected, config.fit.tolerance, config.fit.mode, config.fit.window);
    });

    json summary = {{"provenance", config.provenance()}, {"parameters", parameters(config, mu)}, {"report", rep.to_json()}};
    bool pass = rep.pass;
    if (config.analysis.cross_check) {
        if (config.analysis.op != OperatorKind::galerkin || config.analysis.p != 2.0)
            fail(Errc::config, "analysis.cross_check needs the galerkin operator at p = 2");
        const auto nys = stage("cross-check", [&] { return eigen_spectrum(assemble_dmu_kernel(mu, config.analysis.s)); });
        const auto a = nonzero_moduli(rep.eigenvalues), b = nonzero_moduli(nys);
        const double gap = max_relative_gap(a, b, 50);
        summary["cross_check"] = {{"against", "dmu_kernel"}, {"k_max", 50}, {"max_relative_gap", gap},
                                  {"tolerance", 0.02}, {"verdict", gap <= 0.02 ? "PASS" : "FAIL"}};
        pass = pass && gap <= 0.02;
    }
    summary["verdict"] = pass ? "PASS" : "FAIL";

    io::write_spectrum_csv(art.add("spectrum.csv"), rep.eigenvalues, config.hash);
    io::write_json(art.add("report.json"), summary);
    io::write_text(art.add("spectrum_plot.py"), plot_script(config, rep));
    return {pass, summary, art.commit()};
}

RunResult run_convergence(const ExperimentConfig& config, std::vector<int> levels) {
    if (levels.empty()) levels = config.levels;
    if (levels.empty()) fail(Errc::config, "convergence needs at least one level");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1]) fail(Errc::config, "convergence levels must be strictly ascending");
    if (config.analysis.op == OperatorKind::trace) fail(Errc::config, "convergence runs on dmu_kernel or galerkin");
    Artifacts art(config.output_dir);
    const double expected = expected_exponent(config);

    json rows = json::array();
    std::string csv = io::csv_header_comment(config.hash) + "level,atoms,slope,delta";
    for (int k = 1; k <= 20; ++k) csv += ",lambda_" + std::to_string(k);
    csv += "\n";
    std::vector<double> slopes;
    for (int level : levels) {
        const auto mu = build_measure(config, level);
        const auto op = stage("assemble at level " + std::to_string(level), [&] { return build_operator(config, mu); });
        const auto rep = stage("fit at level " + std::to_string(level), [&] {
            return make_report(op, expected, config.fit.tolerance, config.fit.mode, config.fit.window);
        });
        std::vector<double> top;
        for (std::size_t k = 0; k < 20; ++k) top.push_back(k < rep.eigenvalues.size() ? std::abs(rep.eigenvalues[k]) : 0.0);
        json row = {{"level", level}, {"atoms", mu.size()}, {"slope", rep.fit.slope}, {"window", {rep.fit.k_lo, rep.fit.k_hi}},
                    {"top_moduli", top}};
        csv += std::to_string(level) + "," + std::to_string(mu.size()) + "," + io::format_double(rep.fit.slope) + ",";
        if (!slopes.empty()) {
            const double delta = rep.fit.slope - slopes.back();
            row["delta"] = delta;
            csv += io::format_double(delta);
        }
        for (double v : top) csv += "," + io::format_double(v);
        csv += "\n";
        slopes.push_back(rep.fit.slope);
        rows.push_back(row);
    }
    bool stable = true;
    for (std::size_t i = 2; i < slopes.size(); ++i) {
        const double prev = std::abs(slopes[i - 1] - slopes[i - 2]), cur = std::abs(slopes[i] - slopes[i - 1]);
        stable = stable && cur <= prev + 0.01;
    }
    json summary = {{"provenance", config.provenance()},
                    {"theoretical_exponent", expected},
                    {"rows", rows},
                    {"noise_floor", 0.01},
                    {"verdict", stable ? "PASS" : "FAIL"}};
    io::write_text(art.add("convergence.csv"), csv);
    io::write_json(art.add("convergence.json"), summary);
    return {stable, summary, art.commit()};
}

json audit_bundle(const ExperimentConfig& config, const std::vector<std::complex<double>>& spectrum,
                  const std::vector<double>& singular_values, bool& pass) {
    json audits = json::array();
    json warnings = json::array();
    pass = true;
    auto add = [&](const std::vector<AuditReport>& reports, const std::string& scope) {
        for (const auto& r : reports) {
            json j = r.to_json();
            j["scope"] = scope;
            audits.push_back(j);
            pass = pass && r.pass;
        }
    };

    std::vector<double> moduli;
    for (const auto& l : spectrum) moduli.push_back(std::abs(l));
    std::sort(moduli.begin(), moduli.end(), std::greater<>());
    json quasinorms = json::array();
    if (config.audits.spectrum_carl) {
        const auto upper = entropy_upper_hilbert(singular_values, config.audits.spectrum_k_max, ScalarField::complex);
        if (moduli.empty()) warnings.push_back("empty spectrum: Carl audit is vacuous");
        add(carl_audit(moduli, upper), "spectrum");
        for (double p : {0.5, 1.0, 2.0})
            for (double q : {1.0, 2.0, static_cast<double>(INFINITY)})
                quasinorms.push_back({{"p", p}, {"q", pvalue(q)}, {"value", entropy_ideal_quasinorm(upper.values, p, q)}});
    }
    if (config.audits.corpus) add(carl_corpus_audit(config.audits.carl), "random-corpus");
    if (config.audits.composition) add(composition_law_audit(config.audits.laws), "random-triples");

    json bundle = {{"provenance", config.provenance()}, {"audits", audits}, {"entropy_ideal_quasinorms", quasinorms},
                   {"warnings", warnings}};
    if (config.audits.duality_report && !moduli.empty() && moduli.front() > 0.0) {
        std::vector<double> sigma;
        for (std::size_t k = 0; k < std::min<std::size_t>(3, moduli.size()); ++k) sigma.push_back(moduli[k] / moduli.front());
        bundle["duality"] = entropy_duality_report(sigma, config.analysis.p, 4, {2001, 121, 25, 20});
    }
    bundle["verdict"] = pass ? "PASS" : "FAIL";
    return bundle;
}

RunResult run_audits(const ExperimentConfig& config) {
    Artifacts art(config.output_dir);
    std::vector<std::complex<double>> spectrum;
    std::vector<double> singular;
    if (config.audits.spectrum_carl) {
        const auto mu = build_measure(config, config.fractal.level);
        const auto op = build_operator(config, mu);
        spectrum = stage("eigensolve", [&] { return eigen_spectrum(op); });
        if (op.symmetric) {
            for (const auto& l : spectrum) singular.push_back(std::abs(l));
        } else {
            singular = stage("singular values", [&] { return approximation_numbers_hilbert(op.matrix).values; });
        }
    }
    bool pass = true;
    const json bundle = stage("audits", [&] { return audit_bundle(config, spectrum, singular, pass); });
    io::write_json(art.add("audits.json"), bundle);
    return {pass, bundle, art.commit()};
}

RunResult run_trace_snumbers(const ExperimentConfig& config) {
    if (config.analysis.p != 2.0) fail(Errc::config, "trace-snumbers needs p = 2");
    Artifacts art(config.output_dir);
    const auto mu = build_measure(config, config.fractal.level);
    const auto check = stage("trace s-numbers", [&] {
        return snumber_exponent_check(mu, config.analysis.s, config.analysis.p, config.analysis.freq,
                                      config.snumbers.tolerance, config.snumbers.window);
    });
    const auto dmu = stage("transference", [&] { return eigen_spectrum(assemble_dmu_kernel(mu, config.analysis.s)); });
    const auto lambda = nonzero_moduli(dmu);
    std::vector<double> squared;
    for (double a : check.approximation_numbers) squared.push_back(a * a);
    const double gap = max_relative_gap(squared, lambda, config.snumbers.transference_k);
    const bool transference = gap <= config.snumbers.transference_tolerance;
    const bool pass = check.pass && transference;

    json summary = {{"provenance", config.provenance()},
                    {"parameters", parameters(config, mu)},
                    {"snumbers", check.to_json()},
                    {"transference",
                     {{"k_max", config.snumbers.transference_k},
                      {"max_relative_gap", gap},
                      {"tolerance", config.snumbers.transference_tolerance},
                      {"verdict", transference ? "PASS" : "FAIL"}}},
                    {"verdict", pass ? "PASS" : "FAIL"}};
    std::string csv = io::csv_header_comment(config.hash) + "k,a_k,a_k_squared,lambda_k\n";
    for (std::size_t k = 0; k < check.approximation_numbers.size(); ++k)
        csv += std::to_string(k + 1) + "," + io::format_double(check.approximation_numbers[k]) + "," +
               io::format_double(squared[k]) + "," + io::format_double(k < lambda.size() ? lambda[k] : 0.0) + "\n";
    io::write_text(art.add("snumbers.csv"), csv);
    io::write_json(art.add("snumbers.json"), summary);
    return {pass, summary, art.commit()};
}

RunResult run_entropy_lab(const ExperimentConfig& config) {
    Artifacts art(config.output_dir);
    json cases = json::array();
    bool pass = true;
    std::string csv = io::csv_header_comment(config.hash) + "case,k,lower,upper\n";
    const int k_max = config.entropy_lab.k_max;
    for (std::size_t i = 0; i < config.entropy_lab.cases.size(); ++i) {
        const auto& lab = config.entropy_lab.cases[i];
        const auto b = stage("entropy case " + std::to_string(i), [&] {
            return entropy_numbers_bruteforce(lab.matrix, k_max, lab.norms, lab.field, config.entropy_lab.options);
        });
        bool ordered = b.upper.nonincreasing() && b.lower.nonincreasing();
        for (int k = 1; k <= k_max; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            ordered = ordered && b.lower.at(kk) <= b.upper.at(kk) * (1.0 + 1e-12);
            csv += std::to_string(i) + "," + std::to_string(k) + "," + io::format_double(b.lower.at(kk)) + "," +
                   io::format_double(b.upper.at(kk)) + "\n";
        }
        json entry = {{"case", i}, {"lower", b.lower.to_json()}, {"upper", b.upper.to_json()},
                      {"net_inflation", b.net_inflation}, {"consistent", ordered}};
        if (lab.norms.p_domain == 2.0 && lab.norms.p_codomain == 2.0) {
            const auto sv = approximation_numbers_hilbert(lab.matrix);
            entry["product_cover"] = entropy_upper_hilbert(sv.values, k_max, lab.field).to_json();
        }
        const bool diagonal = lab.matrix.rows() == lab.matrix.cols() &&
                              (lab.matrix - Eigen::MatrixXcd(lab.matrix.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
        if (diagonal) {
            std::vector<double> sigma;
            for (Eigen::Index j = 0; j < lab.matrix.rows(); ++j) sigma.push_back(std::abs(lab.matrix(j, j)));
            std::sort(sigma.begin(), sigma.end(), std::greater<>());
            json est = json::array();
            for (int k = 1; k <= k_max; ++k) est.push_back(entropy_estimate_diagonal(sigma, k));
            entry["diagonal_estimate"] = est;
        }
        cases.push_back(entry);
        pass = pass && ordered;
    }
    json summary = {{"provenance", config.provenance()}, {"k_max", k_max}, {"cases", cases}, {"verdict", pass ? "PASS" : "FAIL"}};
    io::write_text(art.add("entropy_lab.csv"), csv);
    io::write_json(art.add("entropy_lab.json"), summary);
    return {pass, summary, art.commit()};
}

RunResult run_validate_symbol(const ExperimentConfig& config) {
    Artifacts art(config.output_dir);
    const auto v = stage("validate symbol", [&] {
        Symbol sym = symbol_from_catalog(config.analysis.symbol, config.analysis.symbol_params);
        if (config.validate.declared_delta) sym.type_delta = *config.validate.declared_delta;
        return validate_symbol(sym, config.validate.probes, config.validate.max_order);
    });
    json summary = {{"provenance", config.provenance()}, {"validation", v.to_json()}, {"verdict", v.pass ? "PASS" : "FAIL"}};
    io::write_json(art.add("symbol_validation.json"), summary);
    return {v.pass, summary, art.commit()};
}

} // namespace fracspec
