#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "swgeo/core.hpp"
#include "swgeo/measures.hpp"
#include "swgeo/radon.hpp"
#include "swgeo/slopes.hpp"
#include "swgeo/sobolev.hpp"
#include "swgeo/stats.hpp"
#include "swgeo/swdist.hpp"
#include "swgeo/verify.hpp"

namespace swgeo::cli {

namespace {

using json = nlohmann::json;
using Point = std::span<const double>;

struct Settings {
    // Shared flags.
    std::size_t dirs = 0;  // 0: per-command default
    std::size_t grid = 0;
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string out;
    unsigned threads = 0;
    double tol_scale = 1.0;

    // Command inputs.
    std::string mu, nu, mu0, mu1, candidates, field, density = "uniform-square", potential = "gaussian";
    std::string measure = "uniform-square", mode;
    std::string suite, config;
    double p = 2.0, width = 0.2, step = 1e-3;
    std::vector<double> offset{0.75, 0.5}, eps{0.1, 0.03, 0.01, 0.003};
    std::vector<std::size_t> ns{64, 256, 1024, 4096};
    std::size_t trials = 0, atoms = 10;
};

// Report produced by a command: CSV body plus extra metadata fields.
struct Report {
    explicit Report(std::string body, json fields = json::object(), int status = kOk, std::string lines = {})
        : csv(std::move(body)), extra(std::move(fields)), code(status), console(std::move(lines)) {}

    std::string csv;
    json extra;
    int code;
    std::string console;  // human-readable lines, printed even with --out
};

class Csv {
public:
    explicit Csv(const std::string& header) {
        s_.precision(17);
        s_ << header << '\n';
    }
    template <class... T>
    void row(const T&... cells) {
        bool first = true;
        ((s_ << (first ? "" : ",") << cells, first = false), ...);
        s_ << '\n';
    }
    std::string str() const { return s_.str(); }

private:
    std::ostringstream s_;
};

std::size_t or_default(std::size_t v, std::size_t fallback) { return v ? v : fallback; }

std::ifstream open_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return in;
}

bool is_grid_file(const std::string& path) {
    std::ifstream in = open_file(path);
    std::string word;
    in >> word;
    return word == "box";
}

DiscreteMeasure load_discrete(const std::string& path) {
    std::ifstream in = open_file(path);
    return read_measure_csv(in);
}

GridDensity load_density_file(const std::string& path) {
    std::ifstream in = open_file(path);
    return GridDensity::normalized(read_grid(in));
}

Measure load_measure(const std::string& path) {
    if (is_grid_file(path)) return load_density_file(path);
    return load_discrete(path);
}

GridDensity density_preset(const std::string& name, std::size_t n) {
    if (name == "uniform-square")
        return make_density(Box{{-0.25, -0.25}, {1.25, 1.25}}, {n, n}, [](Point x) {
            return x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0 ? 1.0 : 0.0;
        });
    if (name == "uniform-disk")
        return make_density(Box{{-1.25, -1.25}, {1.25, 1.25}}, {n, n},
                            [](Point x) { return x[0] * x[0] + x[1] * x[1] <= 1.0 ? 1.0 : 0.0; });
    if (name == "gaussian")
        return make_density(Box{{-5.0, -5.0}, {5.0, 5.0}}, {n, n},
                            [](Point x) { return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])); });
    return load_density_file(name);
}

Potential make_potential(const std::string& kind, double width, const Box& box, const std::vector<std::size_t>& shape,
                         std::vector<double> center) {
    if (!(width > 0.0)) throw InputError("potential width must be positive");
    const double cx = center[0], cy = center[1];
    if (kind == "gaussian")
        return Potential::analytic(
            box, shape,
            [=](Point x) {
                const double dx = x[0] - cx, dy = x[1] - cy;
                return std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
            },
            [=](Point x) {
                const double dx = x[0] - cx, dy = x[1] - cy;
                const double e = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
                return std::vector<double>{-dx / (width * width) * e, -dy / (width * width) * e};
            });
    if (kind == "bump") {
        auto value = [=](double r2) {
            const double q = r2 / (width * width);
            return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
        };
        return Potential::analytic(
            box, shape,
            [=](Point x) { return value((x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy)); },
            [=](Point x) {
                const double dx = x[0] - cx, dy = x[1] - cy, r2 = dx * dx + dy * dy;
                const double q = r2 / (width * width);
                if (q >= 1.0) return std::vector<double>{0.0, 0.0};
                const double g = -2.0 * value(r2) / ((1.0 - q) * (1.0 - q) * width * width);
                return std::vector<double>{g * dx, g * dy};
            });
    }
    std::ifstream in = open_file(kind);
    return Potential::from_grid(read_grid(in));
}

DirectionSet directions(const Settings& s, std::size_t fallback) { return make_directions(2, or_default(s.dirs, fallback)); }

void require_plane(std::size_t dim) {
    if (dim != 2) throw InputError("this command works in the plane (d = 2)");
}

Report cmd_swdist(const Settings& s) {
    const Measure mu = load_measure(s.mu), nu = load_measure(s.nu);
    const std::size_t dim = measure_dim(mu);
    if (measure_dim(nu) != dim) throw InputError("measures differ in dimension");
    const DirectionSet dirs = make_directions(dim, or_default(s.dirs, 180));
    const SliceMeasureFamily a = slices_of(mu, dirs), b = slices_of(nu, dirs);
    // Exact W2 needs two discrete measures; grid inputs report NaN.
    double w2 = std::numeric_limits<double>::quiet_NaN();
    if (std::holds_alternative<DiscreteMeasure>(mu) && std::holds_alternative<DiscreteMeasure>(nu))
        w2 = w2_discrete(std::get<DiscreteMeasure>(mu), std::get<DiscreteMeasure>(nu));
    const LswUpper lsw = lsw_upper_linear(a, b);
    Csv csv("sw_p,w2_over_sqrtd,lsw_upper");
    csv.row(sw_p(a, b, s.p), w2 / std::sqrt(static_cast<double>(dim)), lsw.value.value);
    json extra = {{"p", s.p}, {"sw2", sw_p(a, b, 2.0)}, {"lsw_clipped_tail", lsw.clipped_tail}};
    if (!lsw.value.finite) extra["lsw_diagnostic"] = lsw.value.diagnostic;
    return Report(csv.str(), extra);
}

GridField field_or_gaussian(const Settings& s, const std::function<double(Point)>& fallback, double half) {
    if (!s.field.empty()) {
        std::ifstream in = open_file(s.field);
        return read_grid(in);
    }
    const std::size_t n = or_default(s.grid, 256);
    return make_field(Box{{-half, -half}, {half, half}}, {n, n}, fallback);
}

double gaussian_at(Point x, double cx, double cy) {
    const double dx = x[0] - cx, dy = x[1] - cy;
    return std::exp(-0.5 * (dx * dx + dy * dy)) / (2.0 * std::numbers::pi);
}

Report cmd_radon_check(const Settings& s) {
    const GridField f = field_or_gaussian(s, [](Point x) { return gaussian_at(x, 0.0, 0.0); }, 5.0);
    require_plane(f.dim());
    const DirectionSet dirs = directions(s, 180);
    const RGrid grid = RGrid::covering(f.box(), f.spacing(0));
    const GridField back = invert_radon(radon_grid(f, dirs, grid), f.box(), f.shape());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        num += (back[i] - f[i]) * (back[i] - f[i]);
        den += f[i] * f[i];
    }
    Csv csv("check,value");
    csv.row("inversion_rel_l2", std::sqrt(num / den));
    csv.row("fourier_slice_gap", fourier_slice_gap(f, dirs, grid));
    return Report(csv.str());
}

Report cmd_sobolev_check(const Settings& s) {
    if (s.offset.size() != 2) throw InputError("offset needs two coordinates");
    const double ox = s.offset[0], oy = s.offset[1];
    const GridField f = field_or_gaussian(
        s, [=](Point x) { return gaussian_at(x, ox, oy) - gaussian_at(x, -ox, -oy); }, 5.0);
    require_plane(f.dim());
    const DirectionSet dirs = directions(s, 180);
    const RGrid grid = RGrid::covering(f.box(), f.spacing(0));
    const FlaggedValue plane = hts_norm_grid(f, -1.5, -1.5);
    const FlaggedValue sliced = hdot_norm_sliced(radon_grid(f, dirs, grid), -1.0);
    if (!plane.finite) throw InputError(plane.diagnostic);
    if (!sliced.finite) throw InputError(sliced.diagnostic);
    Csv csv("check,value");
    csv.row("plane_norm", plane.value);
    csv.row("sliced_norm", sliced.value);
    csv.row("relative_gap", std::abs(plane.value - sliced.value) / plane.value);
    return Report(csv.str());
}

Measure slope_measure(const Settings& s) {
    const std::string& name = s.measure;
    if (name == "uniform-square" || name == "uniform-disk" || name == "gaussian") return density_preset(name, or_default(s.grid, 256));
    if (is_grid_file(name)) return load_density_file(name);
    return load_discrete(name);
}

Report cmd_slope(const Settings& s) {
    const DirectionSet dirs = directions(s, 180);
    const Measure m = slope_measure(s);
    const bool discrete = std::holds_alternative<DiscreteMeasure>(m);
    if (!s.mode.empty() && s.mode != (discrete ? "discrete" : "ac"))
        throw InputError("mode '" + s.mode + "' does not match the " + (discrete ? "discrete" : "grid") + " measure");
    const json base = {{"potential", s.potential}, {"width", s.width}, {"measure", s.measure}};
    Csv csv("w_slope,sw_slope_lo,sw_slope_hi,hdot_slope");
    if (discrete) {
        const DiscreteMeasure& mu = std::get<DiscreteMeasure>(m);
        require_plane(mu.dim());
        double reach = 0.0;
        for (double c : mu.coords()) reach = std::max(reach, std::abs(c));
        const double half = reach + 4.0 * s.width;
        const Potential v = make_potential(s.potential, s.width, Box{{-half, -half}, {half, half}}, {64, 64}, {0.0, 0.0});
        const double sw = sw_slope_discrete(v, mu);
        csv.row(w_slope(v, mu), sw, sw, hdot_slope(v));
        json extra = base;
        extra["mode"] = "discrete";
        extra["step"] = s.step;
        extra["probe"] = sw_slope_probe(v, mu, s.step, dirs);
        return Report(csv.str(), extra);
    }
    const GridDensity& mu = std::get<GridDensity>(m);
    require_plane(mu.dim());
    const Box& box = mu.field().box();
    const std::vector<double> center{0.5 * (box.lo[0] + box.hi[0]), 0.5 * (box.lo[1] + box.hi[1])};
    const Potential v = make_potential(s.potential, s.width, box, mu.field().shape(), center);
    const Dissipation d = dissipation_check(v, mu, dirs);
    csv.row(w_slope(v, mu), sw_slope_ac_lower(v, mu, dirs), sw_slope_ac_upper(v, mu, dirs), hdot_slope(v));
    json extra = base;
    extra["mode"] = "ac";
    extra["dissipation_lhs"] = d.lhs;
    extra["dissipation_rhs"] = d.rhs;
    return Report(csv.str(), extra);
}

Report cmd_rate(const Settings& s) {
    const GridDensity mu = density_preset(s.density, or_default(s.grid, 384));
    const RateReport r = rate_experiment(mu, s.ns, or_default(s.trials, 50), RandomSeed{s.seed}, directions(s, 64));
    Csv csv("n,trial,sw,lsw_upper,bound");
    for (const RateTrial& t : r.rows) csv.row(t.n, t.trial, t.sw, t.lsw_upper, t.bound);
    json summary = json::array();
    for (const RateSummary& m : r.summary)
        summary.push_back({{"n", m.n},
                           {"sw_mean", m.sw_mean},
                           {"sw_quantiles", {m.sw_q10, m.sw_q50, m.sw_q90}},
                           {"lsw_mean", m.lsw_mean},
                           {"lsw_quantiles", {m.lsw_q10, m.lsw_q50, m.lsw_q90}}});
    return Report(csv.str(),
            {{"sj2", r.sj2}, {"rate_constant", r.rate_constant}, {"slope", r.slope}, {"slope_stderr", r.slope_stderr},
             {"summary", summary}});
}

DiscreteMeasure default_comparison_measure() {
    return from_points({{0.0, 0.0}, {1.0, 0.0}, {0.3, 1.2}, {1.9, 0.8}, {-0.7, 1.6}});
}

Report cmd_compare(const Settings& s) {
    const DiscreteMeasure mu = s.mu.empty() ? default_comparison_measure() : load_discrete(s.mu);
    const auto rows =
        discrete_comparison(mu, s.eps, or_default(s.trials, 30), RandomSeed{s.seed}, make_directions(mu.dim(), or_default(s.dirs, 720)));
    Csv csv("eps,trial,w2_over_d,sw2,winfty,ratio1,ratio2");
    for (const ComparisonRow& r : rows) csv.row(r.eps, r.trial, r.w2_over_d, r.sw2, r.winfty, r.ratio1, r.ratio2);
    return Report(csv.str(), {{"min_gap", min_pairwise_gap(mu)}});
}

Report cmd_midpoint(const Settings& s) {
    const bool custom = !s.mu0.empty() || !s.mu1.empty() || !s.candidates.empty();
    if (custom && (s.mu0.empty() || s.mu1.empty() || s.candidates.empty()))
        throw InputError("give all of --mu0, --mu1 and --candidates, or none");
    const DiscreteMeasure m0 = custom ? load_discrete(s.mu0) : from_points({{-1.0, -1.0}, {1.0, 1.0}});
    const DiscreteMeasure m1 = custom ? load_discrete(s.mu1) : from_points({{-1.0, 1.0}, {1.0, -1.0}});
    std::vector<std::vector<double>> sites;
    if (custom) {
        const DiscreteMeasure c = load_discrete(s.candidates);
        for (std::size_t i = 0; i < c.size(); ++i) sites.emplace_back(c.point(i).begin(), c.point(i).end());
    } else {
        sites = {{-1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}, {1.0, -1.0}};
    }
    const MidpointGap g = midpoint_gap(m0, m1, sites, make_directions(m0.dim(), or_default(s.dirs, 180)));
    Csv csv("site,weight");
    for (std::size_t i = 0; i < g.weights.size(); ++i) csv.row(i, g.weights[i]);
    std::ostringstream line;
    line.precision(17);
    line << "midpoint gap " << g.value << ", certified lower bound " << g.certified << '\n';
    return Report(csv.str(), {{"value", g.value}, {"certified", g.certified}}, kOk, line.str());
}

Report cmd_verify(const Settings& s) {
    verify::Options opts;
    opts.tol_scale = s.tol_scale;
    opts.atoms = s.atoms;
    if (s.seed_given) opts.seed = RandomSeed{s.seed};
    const auto results = verify::run(s.suite, opts);
    // Timings stay out of the CSV so reruns compare byte for byte.
    Csv csv("id,name,passed,metric,threshold");
    json seconds = json::object();
    std::string console;
    bool all = true;
    for (const auto& r : results) {
        csv.row(r.id, r.name, r.passed ? 1 : 0, r.metric, r.threshold);
        seconds[r.name] = r.seconds;
        console += verify::format(r) + '\n';
        all = all && r.passed;
    }
    return Report(csv.str(), {{"suite", s.suite}, {"passed", all}, {"seconds", seconds}}, all ? kOk : kToleranceFailure, console);
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json config_echo(const CLI::App& sub) {
    json echo = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_name() == "--help" || opt->count() == 0) continue;
        const auto& res = opt->results();
        std::string joined;
        for (std::size_t i = 0; i < res.size(); ++i) joined += (i ? "," : "") + res[i];
        std::string key = opt->get_name();
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        echo[key] = joined;
    }
    return echo;
}

void emit(const Settings& s, const CLI::App& sub, const Report& r, double seconds, const std::string& started,
          std::ostream& out) {
    out << r.console;
    if (s.out.empty()) {
        out << r.csv;
        return;
    }
    {
        std::ofstream f(s.out, std::ios::binary);
        if (!f) throw InputError("cannot write '" + s.out + "'");
        f << r.csv;
    }
    json meta = {{"version", kVersion},
                 {"command", sub.get_name()},
                 {"config", config_echo(sub)},
                 {"results", r.extra},
                 {"started_utc", started},
                 {"wall_time_seconds", seconds}};
    std::ofstream m(s.out + ".meta.json", std::ios::binary);
    if (!m) throw InputError("cannot write '" + s.out + ".meta.json'");
    m << meta.dump(2) << '\n';
}

void add_shared(CLI::App* sub, Settings& s) {
    sub->add_option("--dirs", s.dirs, "number of directions")->check(CLI::PositiveNumber);
    sub->add_option("--grid", s.grid, "grid points per axis")->check(CLI::Range(8, 4096));
    sub->add_option("--seed", s.seed, "random seed")->each([&s](const std::string&) { s.seed_given = true; });
    sub->add_option("--out", s.out, "CSV report path (metadata goes to PATH.meta.json)");
    sub->add_option("--threads", s.threads, "worker threads (0: all cores)");
    sub->add_option("--tol-scale", s.tol_scale, "multiplier on verification tolerances")->check(CLI::PositiveNumber);
}

struct Command {
    CLI::App* app;
    std::function<Report(const Settings&)> handler;
};

std::vector<Command> build(CLI::App& app, Settings& s) {
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("swgeo ") + kVersion);
    std::vector<Command> cmds;
    auto add = [&](const std::string& name, const std::string& help, std::function<Report(const Settings&)> fn) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_shared(sub, s);
        cmds.push_back({sub, std::move(fn)});
        return sub;
    };

    auto* sw = add("swdist", "sliced and exact distances between two measures", cmd_swdist);
    sw->add_option("--mu", s.mu, "measure CSV or grid file")->required()->check(CLI::ExistingFile);
    sw->add_option("--nu", s.nu, "measure CSV or grid file")->required()->check(CLI::ExistingFile);
    sw->add_option("--p", s.p, "order of the first sliced distance")->check(CLI::Range(1.0, 1e6));

    auto* rc = add("radon-check", "inversion and Fourier slice checks", cmd_radon_check);
    rc->add_option("--field", s.field, "grid file (default: standard Gaussian)")->check(CLI::ExistingFile);

    auto* sc = add("sobolev-check", "plane against sliced negative Sobolev norm", cmd_sobolev_check);
    sc->add_option("--field", s.field, "mean-zero grid file (default: offset Gaussians)")->check(CLI::ExistingFile);
    sc->add_option("--offset", s.offset, "Gaussian offset x,y")->delimiter(',')->expected(2);

    auto* sl = add("slope", "metric slopes of a potential energy", cmd_slope);
    sl->add_option("--measure", s.measure, "uniform-square, uniform-disk, gaussian, a grid file or a measure CSV");
    sl->add_option("--mode", s.mode, "discrete or ac (default: from the measure)")
        ->check(CLI::IsMember({"discrete", "ac"}));
    sl->add_option("--potential", s.potential, "gaussian, bump or a grid file");
    sl->add_option("--width", s.width, "potential width or bump radius");
    sl->add_option("--step", s.step, "probe step for discrete measures")->check(CLI::PositiveNumber);

    auto* rt = add("rate", "empirical estimation rate experiment", cmd_rate);
    rt->add_option("--density", s.density, "uniform-square, uniform-disk, gaussian or a grid file");
    rt->add_option("--n", s.ns, "sample sizes")->delimiter(',');
    rt->add_option("--trials", s.trials, "trials per sample size");

    auto* cd = add("compare-discrete", "W^2/d against SW^2 under small jitter", cmd_compare);
    cd->add_option("--mu", s.mu, "discrete measure CSV")->check(CLI::ExistingFile);
    cd->add_option("--eps", s.eps, "jitter radii")->delimiter(',');
    cd->add_option("--trials", s.trials, "trials per radius");

    auto* mg = add("midpoint-gap", "distance from candidate measures to the sliced midpoints", cmd_midpoint);
    mg->add_option("--mu0", s.mu0, "discrete measure CSV")->check(CLI::ExistingFile);
    mg->add_option("--mu1", s.mu1, "discrete measure CSV")->check(CLI::ExistingFile);
    mg->add_option("--candidates", s.candidates, "candidate sites as a measure CSV")->check(CLI::ExistingFile);

    auto* vf = add("verify", "acceptance checks", cmd_verify);
    vf->add_option("suite", s.suite, "check name, id or 'all'")->required();
    vf->add_option("--n-atoms", s.atoms, "atoms per measure for identity-delta")->check(CLI::PositiveNumber);
    return cmds;
}

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_config(const std::string& path, std::ostream& out, std::ostream& err) {
    std::ifstream in = open_file(path);
    const std::vector<ConfigSection> sections = parse_config(in);
    if (sections.empty()) throw InputError(path + ": no sections");
    // Every key is checked before any section runs.
    std::vector<std::vector<std::string>> jobs;
    for (const ConfigSection& sec : sections) {
        Settings probe;
        CLI::App app;
        build(app, probe);
        CLI::App* sub = nullptr;
        for (CLI::App* a : app.get_subcommands({}))
            if (a->get_name() == sec.name) sub = a;
        if (!sub) throw InputError(path + ": unknown section [" + sec.name + "]");
        std::vector<std::string> args{sec.name};
        for (std::size_t i = 0; i < sec.entries.size(); ++i) {
            const auto& [key, value] = sec.entries[i];
            const CLI::Option* opt = sub->get_option_no_throw("--" + key);
            if (!opt) opt = sub->get_option_no_throw(key);
            if (!opt || key == "help" || (opt->get_positional() && opt->get_name() != key)) {
                throw InputError(path + ":" + std::to_string(sec.lines[i]) + ": unknown key '" + key + "' in [" +
                                 sec.name + "]");
            }
            if (!opt->get_positional()) args.push_back("--" + key);
            args.push_back(value);
        }
        jobs.push_back(std::move(args));
    }
    int worst = kOk;
    for (const auto& args : jobs) {
        const int code = execute(args, out, err);
        if (code == kInputError) return code;
        worst = std::max(worst, code);
    }
    return worst;
}

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Settings s;
    CLI::App app{"Sliced Wasserstein geometry toolkit", "swgeo"};
    std::vector<Command> cmds = build(app, s);
    auto* runner = app.add_subcommand("run", "run every section of a key = value config file");
    runner->add_option("config", s.config, "config path")->required()->check(CLI::ExistingFile);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << "swgeo " << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "swgeo: " << e.what() << '\n';
        return kInputError;
    }

    if (runner->parsed()) return run_config(s.config, out, err);
    for (const Command& c : cmds) {
        if (!c.app->parsed()) continue;
        set_thread_count(s.threads);
        const std::string started = utc_now();
        const auto t0 = std::chrono::steady_clock::now();
        const Report r = c.handler(s);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        emit(s, *c.app, r, secs, started, out);
        return r.code;
    }
    return kInputError;
}

std::string trim(const std::string& x) {
    const auto b = x.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return x.substr(b, x.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::vector<ConfigSection> parse_config(std::istream& in) {
    std::vector<ConfigSection> out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find_first_of("#;")));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw InputError(where + ": unterminated section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) throw InputError(where + ": empty section name");
            out.push_back({name, {}, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InputError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw InputError(where + ": missing key");
        if (out.empty()) throw InputError(where + ": key '" + key + "' outside any section");
        out.back().entries.emplace_back(key, value);
        out.back().lines.push_back(line_no);
    }
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return execute(args, out, err);
    } catch (const InputError& e) {
        err << "swgeo: " << e.what() << '\n';
        return kInputError;
    } catch (const NumericalError& e) {
        err << "swgeo: numerical failure: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "swgeo: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace swgeo::cli
