#include "gngwt/gng.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gngwt/error.h"

namespace gngwt {

namespace {

void require_range(const char* name, double value, double lo, double hi) {
    if (!(value >= lo && value <= hi)) {
        std::ostringstream msg;
        msg << "GngParams: " << name << " = " << value << " outside [" << lo << ", " << hi << "]";
        throw InvalidArgument(msg.str());
    }
}

double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

}  // namespace

void GngParams::validate() const {
    require_range("eps_b", eps_b, 0.0, 1.0);
    require_range("eps_n", eps_n, 0.0, 0.2);
    require_range("t_gamma", t_gamma, 0.0, 5.0);
    require_range("a_max", a_max, 50, 250);
    require_range("alpha", alpha, 0.0, 1.0);
    require_range("d", d, 0.0, 1.0);
    if (eps_n > eps_b) {
        throw InvalidArgument("GngParams: eps_n must not exceed eps_b");
    }
}

// ---------------------------------------------------------------------------
// GngModel

GngModel::GngModel(double error_unit) : error_unit_(error_unit) {
    if (!(error_unit > 0) || !std::isfinite(error_unit)) {
        throw InvalidArgument("GngModel: error unit must be positive");
    }
}

void GngModel::scale_errors(double factor) {
    for (double& e : errors_) e *= factor;
}

int GngModel::add_neuron(const Vec3& position, double error) {
    positions_.push_back(position);
    errors_.push_back(error);
    adjacency_.emplace_back();
    if (cell_ > 0) grid_insert(size() - 1);
    return size() - 1;
}

void GngModel::set_position(int i, const Vec3& p) {
    positions_[i] = p;
    if (cell_ > 0 && grid_key(p) != cell_key_[i]) {
        grid_erase(i);
        grid_insert(i);
    }
}

int GngModel::remove_neuron(int i) {
    while (!adjacency_[i].empty()) {
        disconnect(i, adjacency_[i].back().to);
    }
    const int last = size() - 1;
    int moved = -1;
    if (cell_ > 0) {
        grid_erase(i);
        if (i != last) {
            for (int& slot : cells_[cell_key_[last]]) {
                if (slot == last) slot = i;
            }
            cell_key_[i] = cell_key_[last];
        }
        cell_key_.pop_back();
    }
    if (i != last) {
        positions_[i] = positions_[last];
        errors_[i] = errors_[last];
        adjacency_[i] = std::move(adjacency_[last]);
        for (const EdgeRef& e : adjacency_[i]) {
            for (EdgeRef& back : adjacency_[e.to]) {
                if (back.to == last) back.to = i;
            }
        }
        moved = last;
    }
    positions_.pop_back();
    errors_.pop_back();
    adjacency_.pop_back();
    return moved;
}

namespace {

constexpr std::uint64_t kOverflowCell = ~std::uint64_t{0};
constexpr std::int64_t kCellRange = std::int64_t{1} << 20;
constexpr int kMaxRings = 6;

std::uint64_t pack_cell(std::int64_t x, std::int64_t y, std::int64_t z) {
    if (std::abs(x) >= kCellRange || std::abs(y) >= kCellRange || std::abs(z) >= kCellRange) return kOverflowCell;
    return (static_cast<std::uint64_t>(x + kCellRange) << 42) | (static_cast<std::uint64_t>(y + kCellRange) << 21) |
           static_cast<std::uint64_t>(z + kCellRange);
}

std::int64_t cell_coord(double v, double cell) {
    const double c = std::floor(v / cell);
    if (!(std::abs(c) < static_cast<double>(kCellRange))) return kCellRange;
    return static_cast<std::int64_t>(c);
}

struct Best2 {
    int w1 = -1, w2 = -1;
    double d1 = std::numeric_limits<double>::infinity(), d2 = std::numeric_limits<double>::infinity();

    void offer(int i, double d) {
        if (d < d1 || (d == d1 && i < w1)) {
            d2 = d1;
            w2 = w1;
            d1 = d;
            w1 = i;
        } else if (d < d2 || (d == d2 && i < w2)) {
            d2 = d;
            w2 = i;
        }
    }
};

}  // namespace

void GngModel::enable_grid(double cell) {
    if (!(cell > 0) || !std::isfinite(cell)) {
        throw InvalidArgument("GngModel: grid cell size must be positive");
    }
    cell_ = cell;
    cells_.clear();
    cell_key_.clear();
    for (int i = 0; i < size(); ++i) grid_insert(i);
}

std::uint64_t GngModel::grid_key(const Vec3& p) const {
    return pack_cell(cell_coord(p.x(), cell_), cell_coord(p.y(), cell_), cell_coord(p.z(), cell_));
}

void GngModel::grid_insert(int i) {
    const std::uint64_t key = grid_key(positions_[i]);
    if (cell_key_.size() <= static_cast<std::size_t>(i)) cell_key_.resize(i + 1);
    cell_key_[i] = key;
    cells_[key].push_back(i);
}

void GngModel::grid_erase(int i) {
    auto it = cells_.find(cell_key_[i]);
    auto& list = it->second;
    list.erase(std::find(list.begin(), list.end(), i));
    if (list.empty()) cells_.erase(it);
}

std::pair<int, int> GngModel::nearest_two_linear(const Vec3& p) const {
    Best2 best;
    for (int i = 0; i < size(); ++i) best.offer(i, squared_distance(positions_[i], p));
    return {best.w1, best.w2};
}

std::pair<int, int> GngModel::nearest_two(const Vec3& p) const {
    if (size() < 2) {
        throw GngFailure("nearest_two: model needs at least two neurons");
    }
    if (cell_ <= 0 || grid_key(p) == kOverflowCell) return nearest_two_linear(p);

    Best2 best;
    std::size_t seen = 0;
    auto scan = [&](std::uint64_t key) {
        auto it = cells_.find(key);
        if (it == cells_.end()) return;
        for (int i : it->second) best.offer(i, squared_distance(positions_[i], p));
        seen += it->second.size();
    };
    scan(kOverflowCell);
    const std::int64_t cx = cell_coord(p.x(), cell_);
    const std::int64_t cy = cell_coord(p.y(), cell_);
    const std::int64_t cz = cell_coord(p.z(), cell_);
    for (int r = 0; r <= kMaxRings; ++r) {
        for (int dx = -r; dx <= r; ++dx) {
            for (int dy = -r; dy <= r; ++dy) {
                const bool edge = std::abs(dx) == r || std::abs(dy) == r;
                for (int dz = -r; dz <= r; dz += (edge ? 1 : 2 * std::max(r, 1))) {
                    scan(pack_cell(cx + dx, cy + dy, cz + dz));
                }
            }
        }
        const double reach = r * cell_;
        if (seen == static_cast<std::size_t>(size()) || (best.w2 >= 0 && best.d2 < reach * reach)) {
            return {best.w1, best.w2};
        }
    }
    return nearest_two_linear(p);
}

EdgeRef* GngModel::find_edge(int a, int b) {
    for (EdgeRef& e : adjacency_[a]) {
        if (e.to == b) return &e;
    }
    return nullptr;
}

void GngModel::connect(int a, int b) {
    if (a == b) {
        throw InvalidArgument("GngModel: self loops are not allowed");
    }
    if (EdgeRef* e = find_edge(a, b)) {
        e->age = 0;
        find_edge(b, a)->age = 0;
        return;
    }
    adjacency_[a].push_back({b, 0});
    adjacency_[b].push_back({a, 0});
    ++edge_count_;
}

bool GngModel::disconnect(int a, int b) {
    auto drop = [this](int from, int to) {
        auto& list = adjacency_[from];
        auto it = std::find_if(list.begin(), list.end(), [to](const EdgeRef& e) { return e.to == to; });
        if (it == list.end()) return false;
        list.erase(it);
        return true;
    };
    if (!drop(a, b)) return false;
    drop(b, a);
    --edge_count_;
    return true;
}

bool GngModel::connected(int a, int b) const {
    const auto& list = adjacency_[a];
    return std::any_of(list.begin(), list.end(), [b](const EdgeRef& e) { return e.to == b; });
}

int GngModel::edge_age(int a, int b) const {
    for (const EdgeRef& e : adjacency_[a]) {
        if (e.to == b) return e.age;
    }
    return -1;
}

void GngModel::set_edge_age(int a, int b, int age) {
    EdgeRef* e = find_edge(a, b);
    if (e == nullptr) {
        throw InvalidArgument("GngModel: no edge to age");
    }
    e->age = age;
    find_edge(b, a)->age = age;
}

void GngModel::age_edges_of(int i) {
    for (EdgeRef& e : adjacency_[i]) {
        ++e.age;
        find_edge(e.to, i)->age = e.age;
    }
}

void GngModel::check_invariants() const {
    std::size_t half_edges = 0;
    for (int i = 0; i < size(); ++i) {
        if (!std::isfinite(errors_[i]) || errors_[i] < 0) {
            throw Error("GngModel: neuron " + std::to_string(i) + " has invalid error");
        }
        if (!positions_[i].allFinite()) {
            throw Error("GngModel: neuron " + std::to_string(i) + " has a non-finite position");
        }
        for (std::size_t k = 0; k < adjacency_[i].size(); ++k) {
            const EdgeRef& e = adjacency_[i][k];
            if (e.to < 0 || e.to >= size()) throw Error("GngModel: dangling edge");
            if (e.to == i) throw Error("GngModel: self loop");
            if (e.age < 0) throw Error("GngModel: negative edge age");
            if (edge_age(e.to, i) != e.age) throw Error("GngModel: asymmetric edge");
            for (std::size_t m = k + 1; m < adjacency_[i].size(); ++m) {
                if (adjacency_[i][m].to == e.to) throw Error("GngModel: duplicate edge");
            }
        }
        half_edges += adjacency_[i].size();
    }
    if (half_edges != 2 * edge_count_) {
        throw Error("GngModel: edge count out of sync");
    }
}

bool operator==(const GngModel& a, const GngModel& b) {
    if (a.error_unit_ != b.error_unit_ || a.positions_ != b.positions_ || a.errors_ != b.errors_ ||
        a.edge_count_ != b.edge_count_ || a.adjacency_.size() != b.adjacency_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.adjacency_.size(); ++i) {
        const auto& x = a.adjacency_[i];
        const auto& y = b.adjacency_[i];
        if (x.size() != y.size()) return false;
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (x[k].to != y[k].to || x[k].age != y[k].age) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Training

TrainingCloud::TrainingCloud(PointCloud cloud)
    : cloud_((validate(cloud), std::move(cloud))),
      index_(cloud_),
      spacing_(median_nn_spacing(cloud_)),
      diagonal_(bounding_box_diagonal(cloud_.points)) {}

std::string EpochTrace::to_csv() const {
    std::ostringstream out;
    out << "epoch,epsilon,neurons,edges\n";
    out.precision(17);
    for (const EpochRecord& r : epochs) {
        out << r.epoch << ',' << r.epsilon << ',' << r.neurons << ',' << r.edges << '\n';
    }
    return out.str();
}

GngModel init_model(const PointCloud& cloud, Rng& rng, double error_unit) {
    if (cloud.size() < 2) {
        throw InvalidArgument("init_model: cloud needs at least two points");
    }
    std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
    const std::size_t first = pick(rng);
    std::size_t second = pick(rng);
    // Distinct positions, not just distinct indices; give up after a bounded number of draws
    // only if the cloud is one repeated point.
    for (int attempt = 0; attempt < 1000 && (second == first || cloud.points[second] == cloud.points[first]);
         ++attempt) {
        second = pick(rng);
    }
    if (cloud.points[second] == cloud.points[first]) {
        auto it = std::find_if(cloud.points.begin(), cloud.points.end(),
                               [&](const Vec3& p) { return p != cloud.points[first]; });
        if (it == cloud.points.end()) {
            throw InvalidArgument("init_model: cloud has no two distinct points");
        }
        second = static_cast<std::size_t>(it - cloud.points.begin());
    }
    GngModel model(error_unit);
    const int a = model.add_neuron(cloud.points[first]);
    const int b = model.add_neuron(cloud.points[second]);
    model.connect(a, b);
    return model;
}

GngModel init_model(const PointCloud& cloud, std::uint64_t seed, double error_unit) {
    Rng rng(seed);
    return init_model(cloud, rng, error_unit);
}

bool present_signal(GngModel& model, const GngParams& params, const Vec3& signal) {
    const int n = model.size();
    if (n < 2) {
        throw GngFailure("present_signal: model needs at least two neurons");
    }

    // (1) winner and runner-up
    auto [w1, w2] = model.nearest_two(signal);
    const std::vector<Vec3>& pos = model.positions();
    const double d1 = squared_distance(pos[w1], signal);

    // (2) error accumulation in squared error units
    const double unit = model.error_unit();
    model.set_error(w1, model.error(w1) + d1 / (unit * unit));

    // (3) adaptation of the winner and its topological neighbors
    model.set_position(w1, pos[w1] + params.eps_b * (signal - pos[w1]));
    for (const EdgeRef& e : model.neighbors(w1)) {
        model.set_position(e.to, pos[e.to] + params.eps_n * (signal - pos[e.to]));
    }

    // (4) aging, (5) competitive Hebbian edge
    model.age_edges_of(w1);
    model.connect(w1, w2);

    // (6) edges older than a_max, then neurons they left isolated
    std::vector<int> orphaned;
    {
        std::vector<int> stale;
        for (const EdgeRef& e : model.neighbors(w1)) {
            if (e.age > params.a_max) stale.push_back(e.to);
        }
        for (int other : stale) {
            model.disconnect(w1, other);
            if (model.neighbors(other).empty()) orphaned.push_back(other);
        }
    }
    std::sort(orphaned.begin(), orphaned.end(), std::greater<>());
    for (int victim : orphaned) {
        if (model.remove_neuron(victim) == w1) w1 = victim;
    }

    // (7) error-triggered insertion between the winner and its worst neighbor
    bool inserted = false;
    if (model.error(w1) > params.t_gamma && !model.neighbors(w1).empty()) {
        int q = -1;
        for (const EdgeRef& e : model.neighbors(w1)) {
            if (q < 0 || model.error(e.to) > model.error(q) || (model.error(e.to) == model.error(q) && e.to < q)) {
                q = e.to;
            }
        }
        const int r = model.add_neuron(0.5 * (model.position(w1) + model.position(q)));
        model.disconnect(w1, q);
        model.connect(w1, r);
        model.connect(r, q);
        model.set_error(w1, model.error(w1) * params.alpha);
        model.set_error(q, model.error(q) * params.alpha);
        model.set_error(r, model.error(w1));
        model.count_insertion();
        inserted = true;
    }

    // (8) global decay
    model.scale_errors(params.d);
    return inserted;
}

std::size_t train_epoch(GngModel& model, const GngParams& params, const TrainingCloud& cloud, double noise_sigma,
                        Rng& rng, const TrainingOptions& options) {
    const PointCloud& points = cloud.cloud();
    const std::size_t signals = std::min(points.size(), options.max_signals_per_epoch);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t budget = std::min(
        options.neuron_budget,
        std::max<std::size_t>(3, static_cast<std::size_t>(options.max_neurons_per_point * points.size())));
    for (std::size_t s = 0; s < signals; ++s) {
        Vec3 signal = points.points[pick(rng)];
        if (noise_sigma > 0) {
            const double nx = noise(rng);
            const double ny = noise(rng);
            const double nz = noise(rng);
            signal += noise_sigma * Vec3(nx, ny, nz);
        }
        present_signal(model, params, signal);
        if (static_cast<std::size_t>(model.size()) > budget) {
            throw GngFailure("neuron budget of " + std::to_string(budget) + " exceeded");
        }
    }

    // Diverted neurons: farther from every input point than the divergence threshold.
    const double threshold = options.divergence_factor * cloud.spacing();
    std::size_t removed = 0;
    for (int i = model.size() - 1; i >= 0 && model.size() > 2; --i) {
        if (cloud.index().nearest_distance(model.position(i)) > threshold) {
            model.remove_neuron(i);
            ++removed;
        }
    }
    return removed;
}

double consistency_error(const GngModel& model, const SpatialIndex& cloud_index) {
    if (model.size() == 0) {
        throw InvalidArgument("consistency_error: empty model");
    }
    double sum = 0.0;
    for (const Vec3& p : model.positions()) {
        sum += cloud_index.nearest_distance(p);
    }
    return sum / model.size();
}

ReconstructResult reconstruct(const TrainingCloud& cloud, const GngParams& params, std::uint64_t seed,
                              const TrainingOptions& options) {
    params.validate();
    const double noise_sigma = options.noise_sigma.value_or(options.noise_fraction * cloud.spacing());
    double unit = cloud.diagonal() / options.error_unit_divisions;
    if (!(unit > 0)) unit = 1.0;

    Rng rng(seed);
    ReconstructResult result{init_model(cloud.cloud(), rng, unit), {}, 0, false};
    result.model.enable_grid(unit);
    GngModel current = result.model;

    // The freshly created model has no predecessor, so the first epoch is never rejected.
    double previous = std::numeric_limits<double>::infinity();
    for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
        train_epoch(current, params, cloud, noise_sigma, rng, options);
        const double eps = consistency_error(current, cloud.index());
        result.trace.epochs.push_back({epoch, eps, static_cast<std::size_t>(current.size()), current.edge_count()});
        if (eps > previous) {
            result.converged = true;
            break;
        }
        previous = eps;
        result.model = current;
        result.best_epoch = epoch;
    }
    return result;
}

ReconstructResult reconstruct(const PointCloud& cloud, const GngParams& params, std::uint64_t seed,
                              const TrainingOptions& options) {
    return reconstruct(TrainingCloud(cloud), params, seed, options);
}

TriangleMesh extract_faces(const GngModel& model) {
    TriangleMesh mesh;
    mesh.vertices = model.positions();
    std::vector<std::vector<int>> higher(model.size());
    for (int a = 0; a < model.size(); ++a) {
        for (const EdgeRef& e : model.neighbors(a)) {
            if (e.to > a) higher[a].push_back(e.to);
        }
        std::sort(higher[a].begin(), higher[a].end());
    }
    for (int a = 0; a < model.size(); ++a) {
        const auto& na = higher[a];
        for (std::size_t i = 0; i < na.size(); ++i) {
            const auto& nb = higher[na[i]];
            for (std::size_t j = i + 1; j < na.size(); ++j) {
                if (std::binary_search(nb.begin(), nb.end(), na[j])) {
                    mesh.faces.push_back({a, na[i], na[j]});
                }
            }
        }
    }
    return mesh;
}

}  // namespace gngwt
