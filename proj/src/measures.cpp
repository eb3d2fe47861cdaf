#include "swgeo/measures.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "swgeo/core.hpp"

namespace swgeo {

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
    if (dim_ == 0) throw InputError("measure dimension must be positive");
    if (weights_.empty()) throw InputError("empty point list");
    if (coords_.size() != dim_ * weights_.size()) throw InputError("dimension mismatch in point list");
    for (double c : coords_)
        if (!std::isfinite(c)) throw InputError("non-finite coordinate");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("negative or non-finite weight");
        if (w == 0.0) throw InputError("zero weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        for (double& w : weights_) w /= total;
    }
}

bool DiscreteMeasure::uniform_weights() const {
    const double u = 1.0 / static_cast<double>(size());
    return std::all_of(weights_.begin(), weights_.end(), [u](double w) { return std::abs(w - u) <= 1e-12; });
}

DiscreteMeasure from_points(const std::vector<std::vector<double>>& points,
                            const std::optional<std::vector<double>>& weights) {
    if (points.empty()) throw InputError("empty point list");
    const std::size_t d = points.front().size();
    std::vector<double> coords;
    coords.reserve(d * points.size());
    for (const auto& p : points) {
        if (p.size() != d) throw InputError("dimension mismatch in point list");
        coords.insert(coords.end(), p.begin(), p.end());
    }
    std::vector<double> w;
    if (weights) {
        if (weights->size() != points.size()) throw InputError("weight count differs from point count");
        w = *weights;
    } else {
        w.assign(points.size(), 1.0 / static_cast<double>(points.size()));
    }
    return DiscreteMeasure(d, std::move(coords), std::move(w));
}

DiscreteMeasure dirac(std::vector<double> x) {
    const std::size_t d = x.size();
    return DiscreteMeasure(d, std::move(x), {1.0});
}

DiscreteMeasure canonicalize(const DiscreteMeasure& mu) {
    std::map<std::vector<double>, double> merged;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        auto p = mu.point(i);
        merged[std::vector<double>(p.begin(), p.end())] += mu.weight(i);
    }
    std::vector<double> coords, weights;
    for (const auto& [p, w] : merged) {
        coords.insert(coords.end(), p.begin(), p.end());
        weights.push_back(w);
    }
    return DiscreteMeasure(mu.dim(), std::move(coords), std::move(weights));
}

namespace {
double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}
}  // namespace

double min_pairwise_gap(const DiscreteMeasure& mu) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = i + 1; j < mu.size(); ++j) best = std::min(best, distance(mu.point(i), mu.point(j)));
    return best;
}

DiscreteMeasure translated(const DiscreteMeasure& mu, std::span<const double> shift) {
    if (shift.size() != mu.dim()) throw InputError("shift dimension mismatch");
    std::vector<double> coords = mu.coords();
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] += shift[i % mu.dim()];
    return DiscreteMeasure(mu.dim(), std::move(coords), mu.weights());
}

// ---- grids ----

GridField::GridField(Box box, std::vector<std::size_t> shape, std::vector<double> values)
    : box_(std::move(box)), shape_(std::move(shape)), values_(std::move(values)) {
    if (box_.lo.size() != box_.hi.size() || box_.lo.size() != shape_.size() || shape_.empty())
        throw InputError("grid box and shape disagree in dimension");
    std::size_t count = 1;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        if (shape_[a] < 2) throw InputError("grid shape must be at least 2 per axis");
        if (!(box_.hi[a] > box_.lo[a])) throw InputError("grid box must have hi > lo");
        count *= shape_[a];
    }
    if (values_.size() != count) throw InputError("grid value count does not match shape");
}

GridField::GridField(Box box, std::vector<std::size_t> shape)
    : GridField(box, shape, std::vector<double>(std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                                                std::multiplies<>()),
                                                0.0)) {}

double GridField::spacing(std::size_t axis) const {
    return (box_.hi[axis] - box_.lo[axis]) / static_cast<double>(shape_[axis]);
}

double GridField::cell_volume() const {
    double v = 1.0;
    for (std::size_t a = 0; a < dim(); ++a) v *= spacing(a);
    return v;
}

double GridField::center(std::size_t axis, std::size_t i) const {
    return box_.lo[axis] + (static_cast<double>(i) + 0.5) * spacing(axis);
}

std::vector<double> GridField::center_of(std::size_t flat) const {
    std::vector<double> x(dim());
    for (std::size_t a = dim(); a-- > 0;) {
        x[a] = center(a, flat % shape_[a]);
        flat /= shape_[a];
    }
    return x;
}

double GridField::integral() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) * cell_volume();
}

double GridField::sample(double x, double y) const {
    const std::size_t nx = shape_[0], ny = shape_[1];
    const double fx = (x - box_.lo[0]) / spacing(0) - 0.5;
    const double fy = (y - box_.lo[1]) / spacing(1) - 0.5;
    if (fx <= -1.0 || fy <= -1.0 || fx >= static_cast<double>(nx) || fy >= static_cast<double>(ny)) return 0.0;
    const double ix = std::floor(fx), iy = std::floor(fy);
    const double tx = fx - ix, ty = fy - iy;
    const long i0 = static_cast<long>(ix), j0 = static_cast<long>(iy);
    auto at = [&](long i, long j) -> double {
        if (i < 0 || j < 0 || i >= static_cast<long>(nx) || j >= static_cast<long>(ny)) return 0.0;
        return values_[static_cast<std::size_t>(i) * ny + static_cast<std::size_t>(j)];
    };
    return (1 - tx) * ((1 - ty) * at(i0, j0) + ty * at(i0, j0 + 1)) +
           tx * ((1 - ty) * at(i0 + 1, j0) + ty * at(i0 + 1, j0 + 1));
}

bool GridField::same_grid(const GridField& other) const {
    return shape_ == other.shape_ && box_.lo == other.box_.lo && box_.hi == other.box_.hi;
}

GridField make_field(const Box& box, const std::vector<std::size_t>& shape,
                     const std::function<double(std::span<const double>)>& fn) {
    GridField f(box, shape);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto x = f.center_of(i);
        f[i] = fn(x);
    }
    return f;
}

GridDensity::GridDensity(GridField field) : field_(std::move(field)) {
    for (double v : field_.values())
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("density values must be nonnegative and finite");
    if (std::abs(field_.integral() - 1.0) > 1e-9) throw InputError("density mass differs from 1");
}

GridDensity GridDensity::normalized(GridField field) {
    const double mass = field.integral();
    if (!(mass > 0.0)) throw InputError("density has no mass");
    for (double& v : field.values()) v /= mass;
    return GridDensity(std::move(field));
}

GridDensity make_density(const Box& box, const std::vector<std::size_t>& shape,
                         const std::function<double(std::span<const double>)>& fn) {
    return GridDensity::normalized(make_field(box, shape, fn));
}

DiscreteMeasure sample_empirical(const GridDensity& density, std::size_t n, RandomSeed seed) {
    if (n == 0) throw InputError("sample count must be positive");
    const GridField& f = density.field();
    std::vector<double> cumulative(f.size());
    double run = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        run += f[i];
        cumulative[i] = run;
    }
    Rng rng(seed);
    const std::size_t d = f.dim();
    std::vector<double> coords(n * d);
    for (std::size_t s = 0; s < n; ++s) {
        const double u = rng.uniform() * run;
        std::size_t cell = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                    cumulative.begin());
        cell = std::min(cell, f.size() - 1);
        while (f[cell] == 0.0 && cell > 0) --cell;
        std::size_t rest = cell;
        for (std::size_t a = d; a-- > 0;) {
            const std::size_t idx = rest % f.shape()[a];
            rest /= f.shape()[a];
            coords[s * d + a] = f.box().lo[a] + (static_cast<double>(idx) + rng.uniform()) * f.spacing(a);
        }
    }
    return DiscreteMeasure(d, std::move(coords), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

DiscreteMeasure sample_empirical(const PointSampler& sampler, std::size_t dim, std::size_t n, RandomSeed seed) {
    if (n == 0) throw InputError("sample count must be positive");
    Rng rng(seed);
    std::vector<double> coords(n * dim);
    for (std::size_t s = 0; s < n; ++s) sampler(rng, std::span<double>(coords.data() + s * dim, dim));
    return DiscreteMeasure(dim, std::move(coords), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double second_moment(const DiscreteMeasure& mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        double r2 = 0.0;
        for (double c : mu.point(i)) r2 += c * c;
        s += mu.weight(i) * r2;
    }
    return s;
}

double second_moment(const GridDensity& mu) {
    const GridField& f = mu.field();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == 0.0) continue;
        double r2 = 0.0;
        for (double c : f.center_of(i)) r2 += c * c;
        s += f[i] * r2;
    }
    return s * f.cell_volume();
}

namespace {

// Kuhn augmenting paths; fine for the cloud sizes in scope.
bool has_perfect_matching(const std::vector<std::vector<double>>& dist, double threshold) {
    const std::size_t n = dist.size();
    std::vector<long> match_right(n, -1);
    std::vector<char> seen(n);
    std::function<bool(std::size_t)> augment = [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (dist[i][j] > threshold || seen[j]) continue;
            seen[j] = 1;
            if (match_right[j] < 0 || augment(static_cast<std::size_t>(match_right[j]))) {
                match_right[j] = static_cast<long>(i);
                return true;
            }
        }
        return false;
    };
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(seen.begin(), seen.end(), 0);
        if (!augment(i)) return false;
    }
    return true;
}

}  // namespace

double winfty_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.size() != nu.size()) throw InputError("bottleneck distance needs equal atom counts");
    if (!mu.uniform_weights() || !nu.uniform_weights()) throw InputError("bottleneck distance needs uniform weights");
    if (mu.dim() != nu.dim()) throw InputError("dimension mismatch");
    const std::size_t n = mu.size();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n));
    std::vector<double> all;
    all.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            dist[i][j] = distance(mu.point(i), nu.point(j));
            all.push_back(dist[i][j]);
        }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::size_t lo = 0, hi = all.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (has_perfect_matching(dist, all[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return all[lo];
}

// ---- text formats ----

namespace {

std::vector<double> parse_numbers(const std::string& line, char sep, std::size_t line_no) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
        if (tok.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (tok.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InputError("line " + std::to_string(line_no) + ": cannot parse number '" + tok + "'");
        }
    }
    return out;
}

bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") != std::string::npos && line[line.find_first_not_of(" \t")] != '#')
            return true;
    }
    return false;
}

}  // namespace

DiscreteMeasure read_measure_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!next_content_line(in, line, line_no)) throw InputError("empty measure file");
    if (line.find("dim") != std::string::npos) {
        if (!next_content_line(in, line, line_no)) throw InputError("missing dim,n values");
    }
    const auto head = parse_numbers(line, ',', line_no);
    if (head.size() != 2 || head[0] < 1 || head[1] < 1) throw InputError("line " + std::to_string(line_no) + ": expected dim,n");
    const auto d = static_cast<std::size_t>(head[0]);
    const auto n = static_cast<std::size_t>(head[1]);
    std::vector<double> coords, weights;
    for (std::size_t i = 0; i < n; ++i) {
        if (!next_content_line(in, line, line_no)) throw InputError("measure file ends after " + std::to_string(i) + " atoms");
        const auto row = parse_numbers(line, ',', line_no);
        if (row.size() != d + 1) throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(d + 1) + " columns");
        coords.insert(coords.end(), row.begin(), row.end() - 1);
        weights.push_back(row.back());
    }
    return DiscreteMeasure(d, std::move(coords), std::move(weights));
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu) {
    out << "dim,n\n" << mu.dim() << ',' << mu.size() << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (double c : mu.point(i)) out << c << ',';
        out << mu.weight(i) << '\n';
    }
}

GridField read_grid(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!next_content_line(in, line, line_no) || line.rfind("box", 0) != 0) throw InputError("grid file must start with 'box'");
    const auto bounds = parse_numbers(line.substr(3), ' ', line_no);
    if (bounds.empty() || bounds.size() % 2 != 0) throw InputError("line " + std::to_string(line_no) + ": box needs lo... hi...");
    const std::size_t d = bounds.size() / 2;
    Box box{{bounds.begin(), bounds.begin() + static_cast<long>(d)}, {bounds.begin() + static_cast<long>(d), bounds.end()}};
    if (!next_content_line(in, line, line_no) || line.rfind("shape", 0) != 0) throw InputError("line " + std::to_string(line_no) + ": expected 'shape'");
    const auto sh = parse_numbers(line.substr(5), ' ', line_no);
    if (sh.size() != d) throw InputError("line " + std::to_string(line_no) + ": shape dimension differs from box");
    std::vector<std::size_t> shape;
    for (double s : sh) shape.push_back(static_cast<std::size_t>(s));
    std::vector<double> values;
    while (next_content_line(in, line, line_no)) {
        for (char& c : line)
            if (c == ',' || c == '\t') c = ' ';
        const auto row = parse_numbers(line, ' ', line_no);
        values.insert(values.end(), row.begin(), row.end());
    }
    return GridField(std::move(box), std::move(shape), std::move(values));
}

void write_grid(std::ostream& out, const GridField& f) {
    out << std::setprecision(17) << "box";
    for (double v : f.box().lo) out << ' ' << v;
    for (double v : f.box().hi) out << ' ' << v;
    out << "\nshape";
    for (auto s : f.shape()) out << ' ' << s;
    out << '\n';
    const std::size_t row = f.shape().back();
    for (std::size_t i = 0; i < f.size(); ++i) out << f[i] << ((i + 1) % row == 0 ? '\n' : ' ');
}

}  // namespace swgeo
