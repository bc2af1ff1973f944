#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rng.hpp"

namespace swingmc::oracle {

int FiniteTree::nodes_at(int level) const {
    if (level == cemetery()) level = horizon;
    int n = 1;
    for (int j = 0; j < level; ++j) n *= branching;
    return n;
}

int FiniteTree::level_offset(int level) const {
    int off = 0;
    for (int j = 0; j < level; ++j) off += nodes_at(j);
    return off;
}

int FiniteTree::child(int level, int pos, int c) const {
    if (level < horizon) return node_index(level + 1, pos * branching + c);
    return node_index(cemetery(), pos);
}

int FiniteTree::path_count() const { return nodes_at(horizon); }

int FiniteTree::path_pos(int path, int level) const {
    if (level >= horizon) return path;
    int div = 1;
    for (int j = level; j < horizon; ++j) div *= branching;
    return path / div;
}

void FiniteTree::validate() const {
    if (branching < 1 || horizon < 1) throw std::invalid_argument("tree: bad shape");
    if (static_cast<int>(prices.size()) != total_nodes() ||
        static_cast<int>(probs.size()) != total_nodes())
        throw std::invalid_argument("tree: bad array sizes");
    for (int level = 0; level <= horizon; ++level)
        for (int pos = 0; pos < nodes_at(level); ++pos)
            if (prices[node_index(level, pos)] <= 0.0)
                throw std::invalid_argument("tree: prices must be positive before cemetery");
    for (int pos = 0; pos < nodes_at(cemetery()); ++pos)
        if (prices[node_index(cemetery(), pos)] != 0.0)
            throw std::invalid_argument("tree: cemetery prices must be zero");
    for (int level = 0; level <= horizon; ++level)
        for (int pos = 0; pos < nodes_at(level); ++pos) {
            double sum = 0.0;
            for (int c = 0; c < children_count(level); ++c) sum += probs[child(level, pos, c)];
            if (std::fabs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("tree: child probabilities must sum to 1");
        }
}

FiniteTree FiniteTree::random(std::uint64_t seed, int horizon, int branching) {
    FiniteTree tree;
    tree.branching = branching;
    tree.horizon = horizon;
    tree.prices.assign(tree.total_nodes(), 0.0);
    tree.probs.assign(tree.total_nodes(), 1.0);
    for (int level = 0; level <= horizon; ++level) {
        for (int pos = 0; pos < tree.nodes_at(level); ++pos) {
            const int node = tree.node_index(level, pos);
            const double z = rng::normal(seed, 1, static_cast<std::uint32_t>(node), 0, 0);
            // The per-position factor keeps prices unique within a level.
            tree.prices[node] = std::exp(0.3 * z) * (1.0 + 1e-12 * pos);
        }
    }
    for (int level = 0; level < horizon; ++level) {
        for (int pos = 0; pos < tree.nodes_at(level); ++pos) {
            double weights[16];
            double sum = 0.0;
            for (int c = 0; c < branching; ++c) {
                weights[c] = 0.2 + rng::uniform01(seed, 2, tree.node_index(level, pos), c, 0);
                sum += weights[c];
            }
            for (int c = 0; c < branching; ++c)
                tree.probs[tree.child(level, pos, c)] = weights[c] / sum;
        }
    }
    for (int pos = 0; pos < tree.nodes_at(horizon); ++pos)
        tree.probs[tree.child(horizon, pos, 0)] = 1.0;
    return tree;
}

std::vector<int> path_nodes(const FiniteTree& tree, int path) {
    std::vector<int> nodes(static_cast<std::size_t>(tree.cemetery()) + 1);
    for (int level = 0; level <= tree.cemetery(); ++level)
        nodes[level] = tree.node_index(level, tree.path_pos(path, level));
    return nodes;
}

std::vector<double> path_prices(const FiniteTree& tree, int path) {
    const auto nodes = path_nodes(tree, path);
    std::vector<double> prices(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) prices[i] = tree.prices[nodes[i]];
    return prices;
}

double path_probability(const FiniteTree& tree, int path) {
    const auto nodes = path_nodes(tree, path);
    double p = 1.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) p *= tree.probs[nodes[i]];
    return p;
}

std::vector<double> cond_exp_at_level(const FiniteTree& tree,
                                      std::span<const double> process, int level) {
    std::vector<double> out(tree.total_nodes(), 0.0);
    for (int pos = 0; pos < tree.nodes_at(level); ++pos) {
        const int node = tree.node_index(level, pos);
        out[node] = process[node];
    }
    for (int r = level - 1; r >= 0; --r) {
        for (int pos = 0; pos < tree.nodes_at(r); ++pos) {
            const int node = tree.node_index(r, pos);
            double acc = 0.0;
            for (int c = 0; c < tree.children_count(r); ++c) {
                const int ch = tree.child(r, pos, c);
                acc += tree.probs[ch] * out[ch];
            }
            out[node] = acc;
        }
    }
    return out;
}

TreeEnvelopes TreeEnvelopes::from(const FiniteTree& tree, int rights,
                                  std::vector<std::vector<double>> values) {
    TreeEnvelopes env;
    env.tree = &tree;
    env.rights = rights;
    env.y = std::move(values);
    env.ce.resize(rights + 1);
    for (int l = 1; l <= rights; ++l) {
        env.ce[l].resize(tree.cemetery() + 1);
        for (int d = 0; d <= tree.cemetery(); ++d)
            env.ce[l][d] = cond_exp_at_level(tree, env.y[l], d);
    }
    return env;
}

namespace {
void check_size(const FiniteTree& tree, const ContractSpec& spec, int limit) {
    if (tree.total_nodes() * std::max(1, spec.rights) > limit)
        throw std::invalid_argument("oracle: instance too large");
}
}  // namespace

TreeEnvelopes exact_value(const FiniteTree& tree, const ContractSpec& spec) {
    tree.validate();
    check_size(tree, spec, 10000);
    const int L = spec.rights;
    const int pd = tree.cemetery();
    std::vector<std::vector<double>> y(L + 1,
                                       std::vector<double>(tree.total_nodes(), 0.0));
    TreeEnvelopes env;
    env.tree = &tree;
    env.rights = L;
    env.ce.resize(L + 1);

    for (int l = 1; l <= L; ++l) {
        for (int pos = 0; pos < tree.nodes_at(pd); ++pos)
            y[l][tree.node_index(pd, pos)] = spec.cemetery_value(l, 0.0);
        for (int r = tree.horizon; r >= 0; --r) {
            const int jd = std::min(spec.refraction(r), pd);
            for (int pos = 0; pos < tree.nodes_at(r); ++pos) {
                const int node = tree.node_index(r, pos);
                const double price = tree.prices[node];
                double wait = 0.0;
                for (int c = 0; c < tree.children_count(r); ++c) {
                    const int ch = tree.child(r, pos, c);
                    wait += tree.probs[ch] * y[l][ch];
                }
                double best = wait;
                const int cap = std::min(spec.volume(r, price), l);
                for (int n = 1; n <= cap; ++n) {
                    const double cont =
                        l - n >= 1 ? env.ce[l - n][jd][node] : 0.0;
                    best = std::max(best, spec.immediate_value(l, n, r, price) +
                                              spec.v_product(l, n, r, price) * cont);
                }
                y[l][node] = best;
            }
        }
        env.ce[l].resize(pd + 1);
        for (int d = 0; d <= pd; ++d) env.ce[l][d] = cond_exp_at_level(tree, y[l], d);
    }
    env.y = std::move(y);
    return env;
}

namespace {
// One right at a time: try every stopping decision for the next right given
// the refraction/volume state left by the previous one.
double enum_rec(const FiniteTree& tree, const ContractSpec& spec, int level, int pos,
                int next_right, int last_date, int count_at_last) {
    const int L = spec.rights;
    if (next_right > L) return 0.0;
    const int remaining = L - next_right + 1;
    if (level == tree.cemetery()) return spec.cemetery_value(remaining, 0.0);

    const int node = tree.node_index(level, pos);
    const double price = tree.prices[node];

    double wait = 0.0;
    for (int c = 0; c < tree.children_count(level); ++c) {
        const int ch = tree.child(level, pos, c);
        const int ch_pos = level < tree.horizon ? pos * tree.branching + c : pos;
        wait += tree.probs[ch] *
                enum_rec(tree, spec, level + 1, ch_pos, next_right, last_date,
                         count_at_last);
    }
    double best = wait;

    bool can_exercise;
    int new_count;
    if (last_date == level) {
        can_exercise = count_at_last < spec.volume(level, price);
        new_count = count_at_last + 1;
    } else {
        can_exercise = last_date < 0 || level >= spec.refraction(last_date);
        new_count = 1;
    }
    if (can_exercise) {
        const double now =
            spec.immediate_value(remaining, 1, level, price) +
            spec.v_product(remaining, 1, level, price) *
                enum_rec(tree, spec, level, pos, next_right + 1, level, new_count);
        best = std::max(best, now);
    }
    return best;
}
}  // namespace

double exact_value_enumeration(const FiniteTree& tree, const ContractSpec& spec) {
    tree.validate();
    check_size(tree, spec, 4000);
    return enum_rec(tree, spec, 0, 0, 1, -1, 0);
}

DoobParts doob_decompose(const FiniteTree& tree, std::span<const double> process) {
    DoobParts parts;
    parts.martingale.assign(tree.total_nodes(), 0.0);
    parts.compensator.assign(tree.total_nodes(), 0.0);
    for (int r = 0; r <= tree.horizon; ++r) {
        for (int pos = 0; pos < tree.nodes_at(r); ++pos) {
            const int node = tree.node_index(r, pos);
            double e = 0.0;
            for (int c = 0; c < tree.children_count(r); ++c) {
                const int ch = tree.child(r, pos, c);
                e += tree.probs[ch] * process[ch];
            }
            for (int c = 0; c < tree.children_count(r); ++c) {
                const int ch = tree.child(r, pos, c);
                parts.martingale[ch] = parts.martingale[node] + process[ch] - e;
                parts.compensator[ch] = parts.compensator[node] + process[node] - e;
            }
        }
    }
    return parts;
}

SnellView PathDualInputs::snell_view() const {
    const int dates = static_cast<int>(prices.size());
    const int rights = static_cast<int>(martingales.size());
    return {yhat.data(), e_one.data(), e_delta.data(), rights, dates};
}

PathDualInputs path_dual_inputs(const FiniteTree& tree, const ContractSpec& spec,
                                const TreeEnvelopes& env, int path) {
    const int L = spec.rights;
    const int pd = tree.cemetery();
    const int dates = pd + 1;
    const auto nodes = path_nodes(tree, path);

    PathDualInputs in;
    in.prices = path_prices(tree, path);
    in.martingales.assign(L, std::vector<double>(dates, 0.0));
    in.refraction_terms.assign(L, std::vector<double>(dates, 0.0));
    in.yhat.assign(static_cast<std::size_t>(L) * dates, 0.0);
    in.e_one.assign(in.yhat.size(), 0.0);
    in.e_delta.assign(in.yhat.size(), 0.0);

    for (int l = 1; l <= L; ++l) {
        const DoobParts parts = doob_decompose(tree, env.y[l]);
        for (int j = 0; j <= pd; ++j)
            in.martingales[l - 1][j] = parts.martingale[nodes[j]];
        for (int i = 0; i <= tree.horizon; ++i) {
            const int jd = std::min(spec.refraction(i), pd);
            const auto ce_comp = cond_exp_at_level(tree, parts.compensator, jd);
            in.refraction_terms[l - 1][i] =
                parts.compensator[nodes[jd]] - ce_comp[nodes[i]];
        }
        for (int j = 0; j <= pd; ++j) {
            in.yhat[(l - 1) * dates + j] = env.value(l, nodes[j]);
            if (j <= tree.horizon) {
                const int jd = std::min(spec.refraction(j), pd);
                in.e_one[(l - 1) * dates + j] = env.cond(l, j + 1, nodes[j]);
                in.e_delta[(l - 1) * dates + j] = env.cond(l, jd, nodes[j]);
            }
        }
    }
    return in;
}

namespace {
void chain_rec(const ContractSpec& spec, std::span<const double> prices, int k,
               int prev, int count_at_prev, std::vector<int>& chain,
               const std::function<void(std::span<const int>)>& fn) {
    const int pd = spec.cemetery();
    if (k > spec.rights) {
        fn(chain);
        return;
    }
    const int first = k == 1 ? 0 : std::min(spec.refraction(prev), pd);
    if (k > 1 && count_at_prev < spec.volume(prev, prices[prev])) {
        chain[k - 1] = prev;
        chain_rec(spec, prices, k + 1, prev, count_at_prev + 1, chain, fn);
    }
    for (int j = first; j <= pd; ++j) {
        chain[k - 1] = j;
        chain_rec(spec, prices, k + 1, j, 1, chain, fn);
    }
}
}  // namespace

void for_each_admissible_chain(const ContractSpec& spec, std::span<const double> prices,
                               const std::function<void(std::span<const int>)>& fn) {
    std::vector<int> chain(spec.rights);
    chain_rec(spec, prices, 1, -1, 0, chain, fn);
}

double brute_force_theta(const ContractSpec& spec, PricePath path,
                         const std::vector<std::vector<double>>& martingales,
                         const std::vector<std::vector<double>>& refraction_terms) {
    const int L = spec.rights;
    const int pd = spec.cemetery();
    std::vector<double> prices(static_cast<std::size_t>(pd) + 1);
    for (int j = 0; j <= pd; ++j) prices[j] = path.at(j);
    double best = -std::numeric_limits<double>::infinity();
    for_each_admissible_chain(spec, prices, [&](std::span<const int> chain) {
        double sum = 0.0;
        double prefix = 1.0;
        int prev = 0;  // j_0 := i = 0 anchors the first martingale increment
        for (int k = 1; k <= L; ++k) {
            const int j = chain[k - 1];
            const int l = L - k + 1;
            double term = spec.u_eval(k, j, prices[j]) -
                          (martingales[l - 1][j] - martingales[l - 1][prev]);
            if (k > 1 && j > prev) term += refraction_terms[l - 1][prev];
            sum += prefix * term;
            if (k < L) prefix *= spec.v_eval(k, j, prices[j]);
            prev = j;
        }
        best = std::max(best, sum);
    });
    return best;
}

double envelope_gap_bound(const FiniteTree& tree, const ContractSpec& spec,
                          const TreeEnvelopes& env, int path) {
    const int L = spec.rights;
    const int pd = tree.cemetery();
    const auto nodes = path_nodes(tree, path);
    const auto prices = path_prices(tree, path);
    double best = -std::numeric_limits<double>::infinity();
    for_each_admissible_chain(spec, prices, [&](std::span<const int> chain) {
        double sum = 0.0;
        double prefix = 1.0;
        int prev = -1;
        for (int k = 1; k <= L; ++k) {
            const int j = chain[k - 1];
            const int left = L - k + 1;
            const int lo = k == 1 ? 0 : std::min(spec.refraction(prev), pd);
            for (int r = lo; r <= j - 1; ++r)
                sum += prefix *
                       (env.cond(left, r + 1, nodes[r]) - env.value(left, nodes[r]));
            if (k == 1 || j > prev) {
                const double price = prices[j];
                const int cap = std::min(spec.volume(j, price), left);
                double inner = -std::numeric_limits<double>::infinity();
                for (int n = 1; n <= cap; ++n) {
                    const double cont =
                        j >= pd ? env.value(left - n, nodes[pd])
                                : env.cond(left - n, std::min(spec.refraction(j), pd),
                                           nodes[j]);
                    inner = std::max(inner, spec.immediate_value(left, n, j, price) +
                                                spec.v_product(left, n, j, price) * cont);
                }
                sum += prefix * (inner - env.value(left, nodes[j]));
            }
            if (k < L) prefix *= spec.v_eval(k, j, prices[j]);
            prev = j;
        }
        best = std::max(best, sum);
    });
    return best;
}

DualCheck verify_dual_exactness(const FiniteTree& tree, const ContractSpec& spec) {
    const TreeEnvelopes env = exact_value(tree, spec);
    const double exact = env.value(spec.rights, 0);
    DualCheck check;
    for (int p = 0; p < tree.path_count(); ++p) {
        const PathDualInputs in = path_dual_inputs(tree, spec, env, p);
        const double theta_doob = theta_recursion_inputs(spec, in.price_path(),
                                                         in.martingales,
                                                         in.refraction_terms);
        const double theta_snell =
            theta_recursion(spec, in.snell_view(), in.price_path());
        check.max_theta_dev = std::max(check.max_theta_dev,
                                       std::fabs(theta_doob - exact));
        check.max_theta_dev = std::max(check.max_theta_dev,
                                       std::fabs(theta_snell - exact));
        check.max_gap_bound =
            std::max(check.max_gap_bound,
                     std::fabs(envelope_gap_bound(tree, spec, env, p)));
        check.max_corollary_bound =
            std::max(check.max_corollary_bound,
                     std::fabs(corollary_bound(spec, in.snell_view(), in.price_path())));
    }
    return check;
}

double expected_theta_from_envelopes(const FiniteTree& tree, const ContractSpec& spec,
                                     const TreeEnvelopes& env) {
    double mean = 0.0;
    for (int p = 0; p < tree.path_count(); ++p) {
        const PathDualInputs in = path_dual_inputs(tree, spec, env, p);
        mean += path_probability(tree, p) *
                theta_recursion_inputs(spec, in.price_path(), in.martingales,
                                       in.refraction_terms);
    }
    return mean;
}

TreeContinuation::TreeContinuation(const FiniteTree& tree, const ContractSpec& spec,
                                   const TreeEnvelopes& env)
    : tree_(&tree), spec_(&spec), env_(&env) {
    by_price_.resize(tree.horizon + 1);
    for (int level = 0; level <= tree.horizon; ++level) {
        for (int pos = 0; pos < tree.nodes_at(level); ++pos) {
            const int node = tree.node_index(level, pos);
            by_price_[level].emplace_back(tree.prices[node], node);
        }
        std::sort(by_price_[level].begin(), by_price_[level].end());
    }
}

int TreeContinuation::find_node(int level, double price) const {
    const auto& row = by_price_[level];
    auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(price, 0));
    if (it == row.end() || it->first != price)
        throw std::logic_error("tree continuation: price not on the tree");
    return it->second;
}

double TreeContinuation::one_step(int j, int rights_left, double price) const {
    if (rights_left <= 0) return 0.0;
    const int node = find_node(j, price);
    return env_->cond(rights_left, std::min(j + 1, tree_->cemetery()), node);
}

double TreeContinuation::delta_step(int j, int rights_left, double price) const {
    if (rights_left <= 0) return 0.0;
    const int node = find_node(j, price);
    return env_->cond(rights_left, std::min(spec_->refraction(j), tree_->cemetery()),
                      node);
}

OracleInstance random_instance(std::uint64_t seed, int index) {
    const std::uint64_t key = rng::derive_stream(seed, static_cast<std::uint64_t>(index));
    auto uni = [&](std::uint32_t tag) { return rng::uniform01(key, 7, tag, 0, 0); };

    const int horizon = 1 + static_cast<int>(uni(0) * 5.0);
    const int rights = 1 + static_cast<int>(uni(1) * 3.0);
    const int delta = 1 + static_cast<int>(uni(2) * 3.0);
    OracleInstance inst;
    inst.tree = FiniteTree::random(rng::derive_stream(key, 99), horizon, 2);

    const int pd = horizon + 1;
    std::vector<int> volume_caps(pd + 1, rights);
    for (int j = 0; j <= horizon; ++j)
        volume_caps[j] = std::min(rights, 1 + (uni(100 + j) < 0.5 ? 0 : 1));

    const int kind = index % 3;
    if (kind == 0) {
        inst.spec = preset_swing(0.7 + 0.6 * uni(3), rights, VolumeProfile::unit, delta,
                                 horizon);
    } else if (kind == 1) {
        inst.spec = preset_exp_utility(0.5 + 1.5 * uni(4), 0.7 + 0.6 * uni(3), rights,
                                       VolumeProfile::unit, delta, horizon);
    } else {
        inst.spec = preset_liquidation(1.0 / (horizon + 1), 0.1 + 0.5 * uni(5), rights,
                                       horizon);
    }
    inst.spec.volume = [volume_caps](int j, double) {
        return volume_caps[std::min<std::size_t>(j, volume_caps.size() - 1)];
    };
    inst.spec.refraction = [delta, pd](int i) { return std::min(i + delta, pd); };
    return inst;
}

SuiteReport run_oracle_suite(std::uint64_t seed, int instances) {
    SuiteReport report;
    report.instances = instances;
    for (int i = 0; i < instances; ++i) {
        const OracleInstance inst = random_instance(seed, i);
        const TreeEnvelopes env = exact_value(inst.tree, inst.spec);
        const double exact = env.value(inst.spec.rights, 0);
        const double by_enum = exact_value_enumeration(inst.tree, inst.spec);
        report.max_value_dev = std::max(report.max_value_dev, std::fabs(exact - by_enum));

        const DualCheck check = verify_dual_exactness(inst.tree, inst.spec);
        report.max_theta_dev = std::max(report.max_theta_dev, check.max_theta_dev);
        report.max_gap_bound = std::max(
            report.max_gap_bound,
            std::max(check.max_gap_bound, check.max_corollary_bound));

        // Random martingale/compensator inputs on the first tree path: the
        // recursion must match the brute-force chain maximum regardless.
        const std::uint64_t key = rng::derive_stream(seed, 7777u + i);
        const auto prices = path_prices(inst.tree, 0);
        const int dates = static_cast<int>(prices.size());
        std::vector<std::vector<double>> mart(inst.spec.rights,
                                              std::vector<double>(dates));
        std::vector<std::vector<double>> refr(inst.spec.rights,
                                              std::vector<double>(dates));
        for (int l = 0; l < inst.spec.rights; ++l)
            for (int j = 0; j < dates; ++j) {
                mart[l][j] = rng::normal(key, 1, l, j, 0);
                refr[l][j] = rng::normal(key, 2, l, j, 0);
            }
        const PricePath path{prices.data(), 0, dates - 1};
        const double by_recursion = theta_recursion_inputs(inst.spec, path, mart, refr);
        const double by_force = brute_force_theta(inst.spec, path, mart, refr);
        report.max_recursion_dev =
            std::max(report.max_recursion_dev, std::fabs(by_recursion - by_force));
    }
    return report;
}

}  // namespace swingmc::oracle
