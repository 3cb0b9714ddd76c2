#include "socfedcs/fl_training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"

namespace socfedcs {

Dataset generate_synthetic(int classes, int dim, int n, double separation, Rng& rng)
{
    if (classes < 2 || dim < 1 || n < 1) {
        throw ConfigError(fmt::format("synthetic dataset needs classes >= 2, dim >= 1, n >= 1 (got {}, {}, {})",
                                      classes, dim, n));
    }
    // Orthogonal centres s/sqrt(2) e_c are pairwise s apart.
    const double radius = separation / std::sqrt(2.0);
    Eigen::MatrixXd centres = Eigen::MatrixXd::Zero(classes, dim);
    for (int c = 0; c < classes; ++c) {
        if (dim >= classes) {
            centres(c, c) = radius;
        } else {
            Eigen::VectorXd v(dim);
            for (int j = 0; j < dim; ++j) {
                v(j) = rng.normal();
            }
            centres.row(c) = radius * v.normalized().transpose();
        }
    }

    Dataset ds;
    ds.classes = classes;
    ds.features.resize(n, dim);
    ds.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int c = static_cast<int>(rng.index(static_cast<std::size_t>(classes)));
        ds.labels[static_cast<std::size_t>(i)] = c;
        for (int j = 0; j < dim; ++j) {
            ds.features(i, j) = centres(c, j) + rng.normal();
        }
    }
    for (int j = 0; j < dim; ++j) {
        const double lo = ds.features.col(j).minCoeff();
        const double hi = ds.features.col(j).maxCoeff();
        const double span = hi > lo ? hi - lo : 1.0;
        ds.features.col(j) = (ds.features.col(j).array() - lo) / span;
    }
    return ds;
}

std::pair<Dataset, Dataset> split_tail(const Dataset& dataset, std::size_t tail)
{
    const std::size_t n = dataset.size();
    tail = std::min(tail, n);
    const auto head = static_cast<Eigen::Index>(n - tail);
    Dataset a;
    Dataset b;
    a.classes = b.classes = dataset.classes;
    a.features = dataset.features.topRows(head);
    b.features = dataset.features.bottomRows(static_cast<Eigen::Index>(tail));
    a.labels.assign(dataset.labels.begin(), dataset.labels.begin() + head);
    b.labels.assign(dataset.labels.begin() + head, dataset.labels.end());
    return {std::move(a), std::move(b)};
}

std::vector<double> trust_noise_fractions(const TrustGraph& trust, const NoiseConfig& noise)
{
    const int M = trust.num_fc();
    const int K = trust.num_sc();
    std::vector<double> rows(static_cast<std::size_t>(M));
    std::vector<double> cols(static_cast<std::size_t>(K));
    for (int m = 0; m < M; ++m) {
        rows[static_cast<std::size_t>(m)] = trust.row_sum(m);
    }
    for (int k = 0; k < K; ++k) {
        cols[static_cast<std::size_t>(k)] = trust.column_sum(k);
    }

    double fc_norm = 0.0;
    double sc_norm = 0.0;
    if (noise.paper_literal) {
        fc_norm = sc_norm = trust.total_weight();
    } else {
        fc_norm = rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
        sc_norm = cols.empty() ? 0.0 : *std::max_element(cols.begin(), cols.end());
    }

    auto fraction = [&](double share, double norm) {
        const double f = norm > 0.0 ? noise.scale * (1.0 - share / norm) : noise.scale;
        return std::clamp(f, 0.0, 1.0);
    };
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(M + K));
    for (double r : rows) {
        out.push_back(fraction(r, fc_norm));
    }
    for (double c : cols) {
        out.push_back(fraction(c, sc_norm));
    }
    return out;
}

std::vector<int> fit_shard_sizes(std::span<const int> requested, std::size_t n)
{
    std::vector<int> sizes(requested.begin(), requested.end());
    const long long total = std::accumulate(sizes.begin(), sizes.end(), 0LL);
    if (total <= static_cast<long long>(n)) {
        return sizes;
    }
    const double ratio = static_cast<double>(n) / static_cast<double>(total);
    for (auto& s : sizes) {
        s = std::max(1, static_cast<int>(std::floor(s * ratio)));
    }
    return sizes;
}

namespace {

void check_sizes(const Dataset& dataset, const TrustGraph& trust, std::span<const int> sizes)
{
    if (static_cast<int>(sizes.size()) != trust.num_clients()) {
        throw ConfigError(fmt::format("partition: {} shard sizes for {} clients", sizes.size(), trust.num_clients()));
    }
    const long long total = std::accumulate(sizes.begin(), sizes.end(), 0LL);
    if (total > static_cast<long long>(dataset.size())) {
        throw ConfigError(fmt::format("partition: shards need {} samples, dataset has {}", total, dataset.size()));
    }
}

void apply_noise(std::vector<ClientShard>& shards, const Dataset& dataset, const TrustGraph& trust,
                 const NoiseConfig& noise, Rng& rng)
{
    const auto fractions = trust_noise_fractions(trust, noise);
    for (auto& shard : shards) {
        shard.labels.resize(shard.indices.size());
        for (std::size_t j = 0; j < shard.indices.size(); ++j) {
            shard.labels[j] = dataset.labels[shard.indices[j]];
        }
        shard.noise_fraction = fractions[static_cast<std::size_t>(shard.owner)];
        const auto count = static_cast<std::size_t>(std::llround(shard.noise_fraction * shard.size()));
        for (std::size_t pos : rng.sample_indices(shard.size(), count)) {
            const int shift = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(dataset.classes - 1)));
            shard.labels[pos] = (shard.labels[pos] + shift) % dataset.classes;
        }
        shard.flipped = static_cast<int>(count);
    }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng)
{
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    return order;
}

} // namespace

std::vector<ClientShard> partition_scenario1(const Dataset& dataset, const TrustGraph& trust,
                                             std::span<const int> sizes, const NoiseConfig& noise, Rng& rng)
{
    return partition_scenario2(dataset, trust, sizes, 0.0, noise, rng);
}

std::vector<ClientShard> partition_scenario2(const Dataset& dataset, const TrustGraph& trust,
                                             std::span<const int> sizes, double heterogeneity,
                                             const NoiseConfig& noise, Rng& rng)
{
    if (!(heterogeneity >= 0.0 && heterogeneity <= 1.0)) {
        throw ConfigError(fmt::format("partition: heterogeneity must lie in [0,1], got {}", heterogeneity));
    }
    check_sizes(dataset, trust, sizes);

    const auto order = shuffled_indices(dataset.size(), rng);
    // Per-class pools keep the shuffled order, so no extra draws are needed.
    std::vector<std::vector<std::size_t>> pools(static_cast<std::size_t>(dataset.classes));
    for (std::size_t idx : order) {
        pools[static_cast<std::size_t>(dataset.labels[idx])].push_back(idx);
    }
    std::vector<std::size_t> pool_cursor(pools.size(), 0);
    std::vector<bool> used(dataset.size(), false);
    // Class pools consume the order from the front, the remainder from the back.
    std::size_t cursor = order.size();

    std::vector<ClientShard> shards(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        auto& shard = shards[i];
        shard.owner = static_cast<int>(i);
        const auto want = static_cast<std::size_t>(sizes[i]);
        shard.indices.reserve(want);

        const std::size_t dominant = i % pools.size();
        const auto dominant_count = static_cast<std::size_t>(std::llround(heterogeneity * static_cast<double>(want)));
        auto& pool = pools[dominant];
        auto& pc = pool_cursor[dominant];
        while (shard.indices.size() < dominant_count && pc < pool.size()) {
            const std::size_t idx = pool[pc++];
            if (!used[idx]) {
                used[idx] = true;
                shard.indices.push_back(idx);
            }
        }
        while (shard.indices.size() < want && cursor > 0) {
            const std::size_t idx = order[--cursor];
            if (!used[idx]) {
                used[idx] = true;
                shard.indices.push_back(idx);
            }
        }
    }
    apply_noise(shards, dataset, trust, noise, rng);
    return shards;
}

GlobalModel GlobalModel::zeros(int dim, int classes)
{
    return {Eigen::MatrixXd::Zero(dim, classes), Eigen::VectorXd::Zero(classes), 0};
}

bool GlobalModel::all_finite() const
{
    return weights.allFinite() && bias.allFinite();
}

int local_epochs(double theta, double nu)
{
    return std::max(1, static_cast<int>(std::ceil(nu * std::log(1.0 / theta))));
}

namespace {

// Row-wise softmax probabilities of x W + b, computed stably.
Eigen::MatrixXd probabilities(const GlobalModel& model, const Eigen::MatrixXd& x)
{
    Eigen::MatrixXd logits = x * model.weights;
    logits.rowwise() += model.bias.transpose();
    const Eigen::VectorXd peak = logits.rowwise().maxCoeff();
    logits.colwise() -= peak;
    Eigen::MatrixXd p = logits.array().exp().matrix();
    const Eigen::VectorXd norm = p.rowwise().sum();
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        p.row(r) /= norm(r);
    }
    return p;
}

Eigen::MatrixXd gather_rows(const Dataset& dataset, std::span<const std::size_t> indices)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(indices.size()), dataset.features.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        x.row(static_cast<Eigen::Index>(r)) = dataset.features.row(static_cast<Eigen::Index>(indices[r]));
    }
    return x;
}

} // namespace

LossGradient softmax_loss_gradient(const GlobalModel& model, const Eigen::MatrixXd& x, std::span<const int> labels)
{
    const auto n = x.rows();
    Eigen::MatrixXd p = probabilities(model, x);
    LossGradient out;
    for (Eigen::Index r = 0; r < n; ++r) {
        const int y = labels[static_cast<std::size_t>(r)];
        out.loss -= std::log(std::max(p(r, y), 1e-300));
        p(r, y) -= 1.0;
    }
    const double inv = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
    out.loss *= inv;
    out.grad_weights = x.transpose() * p * inv;
    out.grad_bias = p.colwise().sum().transpose() * inv;
    return out;
}

double shard_loss(const GlobalModel& model, const Dataset& dataset, const ClientShard& shard)
{
    if (shard.size() == 0) {
        return 0.0;
    }
    return softmax_loss_gradient(model, gather_rows(dataset, shard.indices), shard.labels).loss;
}

GlobalModel local_train(const GlobalModel& global, const Dataset& dataset, const ClientShard& shard, double theta,
                        const TrainParams& params, Rng& rng)
{
    GlobalModel model = global;
    if (shard.size() == 0 || params.lr == 0.0) {
        return model;
    }
    const int epochs = local_epochs(theta, params.nu);
    const auto batch = static_cast<std::size_t>(std::max(1, params.batch_size));
    std::vector<std::size_t> order(shard.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> rows;
    std::vector<int> labels;
    for (int e = 0; e < epochs; ++e) {
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            rows.clear();
            labels.clear();
            for (std::size_t j = start; j < end; ++j) {
                rows.push_back(shard.indices[order[j]]);
                labels.push_back(shard.labels[order[j]]);
            }
            const LossGradient g = softmax_loss_gradient(model, gather_rows(dataset, rows), labels);
            model.weights -= params.lr * g.grad_weights;
            model.bias -= params.lr * g.grad_bias;
        }
    }
    return model;
}

GlobalModel aggregate(const GlobalModel& current, std::span<const LocalUpdate> updates)
{
    std::size_t total = 0;
    for (const auto& u : updates) {
        total += u.samples;
    }
    if (updates.empty() || total == 0) {
        return current;
    }
    GlobalModel out;
    out.weights = Eigen::MatrixXd::Zero(current.weights.rows(), current.weights.cols());
    out.bias = Eigen::VectorXd::Zero(current.bias.size());
    for (const auto& u : updates) {
        const double share = static_cast<double>(u.samples) / static_cast<double>(total);
        out.weights += share * u.model.weights;
        out.bias += share * u.model.bias;
    }
    out.round = current.round + 1;
    return out;
}

double evaluate(const GlobalModel& model, const Dataset& test)
{
    if (test.size() == 0) {
        return 0.0;
    }
    Eigen::MatrixXd logits = test.features * model.weights;
    logits.rowwise() += model.bias.transpose();
    std::size_t correct = 0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        int best = 0;
        for (Eigen::Index c = 1; c < logits.cols(); ++c) {
            if (logits(r, c) > logits(r, best)) {
                best = static_cast<int>(c);
            }
        }
        correct += best == test.labels[static_cast<std::size_t>(r)] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

double squared_loss(const GlobalModel& model, const Dataset& dataset, const ClientShard& shard)
{
    if (shard.size() == 0) {
        return 0.0;
    }
    Eigen::MatrixXd out = gather_rows(dataset, shard.indices) * model.weights;
    out.rowwise() += model.bias.transpose();
    for (std::size_t r = 0; r < shard.size(); ++r) {
        out(static_cast<Eigen::Index>(r), shard.labels[r]) -= 1.0;
    }
    return 0.5 * out.squaredNorm() / static_cast<double>(shard.size());
}

std::vector<double> sample_losses(const GlobalModel& model, const Dataset& dataset, const ClientShard& shard)
{
    const Eigen::MatrixXd p = probabilities(model, gather_rows(dataset, shard.indices));
    std::vector<double> out(shard.size());
    for (std::size_t r = 0; r < shard.size(); ++r) {
        out[r] = -std::log(std::max(p(static_cast<Eigen::Index>(r), shard.labels[r]), 1e-300));
    }
    return out;
}

} // namespace socfedcs
