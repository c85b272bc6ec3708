// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lrfs/divergences.hpp"
#include "lrfs/glmb_filter.hpp"
#include "lrfs/io.hpp"
#include "lrfs/metrics.hpp"
#include "lrfs/multiscan.hpp"
#include "lrfs/sim.hpp"
#include "lrfs/tracker.hpp"
#include "oracles.hpp"

using namespace lrfs;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v)
{
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.3g", v);
    return buffer;
}

constexpr double kHalfWidth = 50.0;

Vector point(double x) { return Vector::Constant(1, x); }

ObservationModel scalar_observation(double pd, double r, double clutter)
{
    return ObservationModel{pd, LinearGaussianSensor(Matrix::Identity(1, 1), Matrix::Constant(1, 1, r)),
                            ClutterModel{clutter, Box(point(-kHalfWidth), point(kHalfWidth))}, 1e3};
}

SurvivalModel scalar_survival(double ps, double q)
{
    return SurvivalModel{ps, LinearGaussianMotion(Matrix::Identity(1, 1), Matrix::Constant(1, 1, q))};
}

FilterConfig exhaustive()
{
    FilterConfig cfg;
    cfg.use_ranked_assignment = true;
    cfg.requested_k_best = 1U << 20;
    cfg.max_hypotheses = 1U << 20;
    return cfg;
}

std::string history_key(const AssociationHistory& history)
{
    std::string s;
    for (const auto& r : history.records()) {
        s += std::to_string(r.scan) + "{";
        for (const auto& [label, v] : r.entries) {
            s += to_string(label) + ":" + std::to_string(v) + ";";
        }
        s += "}";
    }
    return s;
}

std::string labels_key(const LabelSet& labels)
{
    std::string s;
    for (const auto& l : labels) {
        s += to_string(l) + ",";
    }
    return s;
}

// ---- 1. two-path GLMB equivalence ------------------------------------------------

Outcome two_path_equivalence()
{
    const auto start = Clock::now();
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> coord(-4.0, 4.0);
    double worst = 0.0;
    bool structure_ok = true;
    for (int instance = 0; instance < 20; ++instance) {
        const int prior_labels = static_cast<int>(gen() % 3);
        const int births = static_cast<int>(gen() % static_cast<unsigned>(4 - prior_labels));
        const int measurements = static_cast<int>(gen() % 4);
        // Prior: every subset of the prior labels, random weights and means.
        std::vector<GlmbHypothesis> hyps;
        for (int mask = 0; mask < (1 << prior_labels); ++mask) {
            GlmbHypothesis h;
            h.log_weight = std::log(0.05 + unit(gen));
            for (int l = 0; l < prior_labels; ++l) {
                if ((mask >> l) & 1) {
                    h.labels.push_back(Label{0, l + 1});
                    h.tracks.push_back(make_track(oracle::gaussian_1d(coord(gen), 0.5 + unit(gen))));
                }
            }
            hyps.push_back(std::move(h));
        }
        const GlmbDensity prior(std::move(hyps));
        std::vector<BirthEntry> entries;
        for (int b = 0; b < births; ++b) {
            entries.push_back({Label{1, b + 1}, 0.05 + 0.5 * unit(gen), oracle::gaussian_1d(coord(gen), 2.0 + unit(gen))});
        }
        const BirthModel birth(1, std::move(entries));
        const auto survival = scalar_survival(0.5 + 0.49 * unit(gen), 0.2 + unit(gen));
        const auto obs = scalar_observation(0.3 + 0.69 * unit(gen), 0.3 + unit(gen), 1.0 + 5.0 * unit(gen));
        Measurements z;
        for (int m = 0; m < measurements; ++m) {
            z.push_back(point(coord(gen)));
        }

        const auto joint = joint_step(prior, z, birth, survival, obs, exhaustive()).posterior;
        const auto two_stage = glmb_update(glmb_predict(prior, birth, survival), z, obs);
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < two_stage.size(); ++i) {
            const auto& h = two_stage.hypotheses()[i];
            index[labels_key(h.labels) + "|" + history_key(h.history)] = i;
        }
        structure_ok = structure_ok && joint.size() == two_stage.size();
        for (std::size_t i = 0; i < joint.size(); ++i) {
            const auto& h = joint.hypotheses()[i];
            const auto it = index.find(labels_key(h.labels) + "|" + history_key(h.history));
            if (it == index.end()) {
                structure_ok = false;
                continue;
            }
            worst = std::max(worst, std::abs(joint.weight(i) / two_stage.weight(it->second) - 1.0));
        }
    }
    const double elapsed = seconds_since(start);
    return {structure_ok && worst <= 1e-9 && elapsed < 10.0,
            "max relative weight error " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

// ---- 2. Gibbs stationarity ---------------------------------------------------------

Outcome gibbs_stationarity()
{
    const auto start = Clock::now();
    const Matrix eta = Matrix::Ones(2, 3);
    GibbsChain chain(eta, 2024, {-1, -1});
    std::map<ExtendedAssociation, double> empirical;
    const int sweeps = 100000;
    for (int t = 0; t < sweeps; ++t) {
        chain.sweep();
        empirical[chain.state()] += 1.0 / sweeps;
    }
    std::map<ExtendedAssociation, double> uniform;
    for (const auto& gamma : oracle::all_valid_associations(2, 1)) {
        uniform[gamma] = 1.0 / 8.0;
    }
    const double tv = oracle::total_variation(empirical, uniform);
    const double elapsed = seconds_since(start);
    return {uniform.size() == 8 && tv < 0.02 && elapsed < 5.0, "TV " + fmt(tv) + ", " + fmt(elapsed) + " s"};
}

// ---- 3. truncation accounting ---------------------------------------------------------

GlmbDensity random_glmb(std::mt19937_64& gen, std::size_t count)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::vector<LabelSet> sets{{}, {Label{0, 1}}, {Label{0, 2}}, {Label{0, 1}, Label{0, 2}}};
    std::vector<GlmbHypothesis> hyps;
    for (std::size_t i = 0; i < count; ++i) {
        GlmbHypothesis h;
        h.log_weight = std::log(0.01 + unit(gen));
        h.labels = sets[gen() % sets.size()];
        for (std::size_t k = 0; k < h.labels.size(); ++k) {
            h.tracks.push_back(make_track(oracle::gaussian_1d(4.0 * unit(gen) - 2.0, 0.5 + unit(gen))));
        }
        // Distinct histories keep hypotheses with equal label sets apart.
        h.history = AssociationHistory{}.extended(ScanAssociation{0, {{Label{9, 9}, static_cast<int>(i)}}});
        hyps.push_back(std::move(h));
    }
    return GlmbDensity(std::move(hyps));
}

Outcome truncation_accounting()
{
    std::mt19937_64 gen(303);
    const auto grid = AttributeGrid::line(-10.0, 10.0, 200);
    const LabelSet pool{Label{0, 1}, Label{0, 2}};
    double worst_exact = 0.0;
    double worst_grid = 0.0;
    double worst_bound_excess = -kInf;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t count = 3 + gen() % 4;
        const GlmbDensity full = random_glmb(gen, count);
        const std::size_t budget = 1 + gen() % (count - 1);
        const auto result = truncate(full, budget);

        // Dropped mass by independent ranking.
        std::vector<double> weights;
        for (std::size_t i = 0; i < full.size(); ++i) {
            weights.push_back(full.weight(i));
        }
        std::sort(weights.rbegin(), weights.rend());
        double dropped = 0.0;
        for (std::size_t i = budget; i < weights.size(); ++i) {
            dropped += weights[i];
        }
        worst_exact = std::max(worst_exact, std::abs(result.l1_error - dropped));

        // Unnormalized truncation: the kept hypotheses at their original weights.
        const double kept_mass = 1.0 - result.l1_error;
        auto kept = [&](const LabeledSet& x) { return kept_mass * eval_density(result.density, x); };
        if (trial < 10) {
            const double l1 = set_integral_oracle(
                [&](const LabeledSet& x) { return std::abs(eval_density(full, x) - kept(x)); }, grid, pool, 2);
            worst_grid = std::max(worst_grid, std::abs(l1 - result.l1_error));
        }
        const double normalized = set_integral_oracle(
            [&](const LabeledSet& x) { return std::abs(eval_density(full, x) - eval_density(result.density, x)); },
            grid, pool, 2);
        worst_bound_excess = std::max(worst_bound_excess, normalized - result.l1_bound_normalized);
    }
    const bool pass = worst_exact <= 1e-12 && worst_grid <= 1e-6 && worst_bound_excess <= 1e-9;
    return {pass, "l1 error vs ranked sum " + fmt(worst_exact) + ", vs set-integral oracle " + fmt(worst_grid)
                      + ", max (normalized distance - bound) " + fmt(worst_bound_excess)};
}

// ---- 4. divergence oracle suite ----------------------------------------------------------

struct GridSums {
    double renyi03 = 0, renyi05 = 0, renyi07 = 0, kl = 0, chi2 = 0, ab = 0, aa = 0, bb = 0;
};

/// Every divergence integrand as a Riemann sum over label subsets and grid
/// tuples, accumulated in one pass. Tuples of a k-label subset carry step^k.
GridSums grid_sums(const std::vector<oracle::Track1d>& a, const std::vector<oracle::Track1d>& b, double lo, double hi,
                   int cells)
{
    const std::size_t n = a.size();
    const double step = (hi - lo) / cells;
    std::vector<std::vector<double>> pdf_a(n);
    std::vector<std::vector<double>> pdf_b(n);
    for (std::size_t l = 0; l < n; ++l) {
        for (int c = 0; c < cells; ++c) {
            const double x = lo + (c + 0.5) * step;
            pdf_a[l].push_back(a[l].existence * oracle::normal_pdf(x, a[l].mean, a[l].variance));
            pdf_b[l].push_back(b[l].existence * oracle::normal_pdf(x, b[l].mean, b[l].variance));
        }
    }
    GridSums total;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> present;
        double absent_a = 1.0;
        double absent_b = 1.0;
        for (std::size_t l = 0; l < n; ++l) {
            if ((mask >> l) & 1U) {
                present.push_back(l);
            } else {
                absent_a *= 1.0 - a[l].existence;
                absent_b *= 1.0 - b[l].existence;
            }
        }
        GridSums sub;
        std::vector<std::size_t> digits(present.size(), 0);
        while (true) {
            double p = absent_a;
            double q = absent_b;
            for (std::size_t i = 0; i < present.size(); ++i) {
                p *= pdf_a[present[i]][digits[i]];
                q *= pdf_b[present[i]][digits[i]];
            }
            if (p > 0.0 && q > 0.0) {
                sub.renyi03 += std::pow(p, 0.3) * std::pow(q, 0.7);
                sub.renyi05 += std::sqrt(p * q);
                sub.renyi07 += std::pow(p, 0.7) * std::pow(q, 0.3);
                sub.kl += p * std::log(p / q);
                sub.chi2 += p * p / q;
            }
            sub.ab += p * q;
            sub.aa += p * p;
            sub.bb += q * q;
            std::size_t k = 0;
            while (k < digits.size() && ++digits[k] == static_cast<std::size_t>(cells)) {
                digits[k++] = 0;
            }
            if (k == digits.size()) {
                break;
            }
        }
        const double volume = std::pow(step, static_cast<double>(present.size()));
        total.renyi03 += volume * sub.renyi03;
        total.renyi05 += volume * sub.renyi05;
        total.renyi07 += volume * sub.renyi07;
        total.kl += volume * sub.kl;
        total.chi2 += volume * sub.chi2;
        total.ab += volume * sub.ab;
        total.aa += volume * sub.aa;
        total.bb += volume * sub.bb;
    }
    return total;
}

Outcome divergence_suite()
{
    const auto start = Clock::now();
    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> existence(0.05, 0.95);
    std::uniform_real_distribution<double> mean(-1.5, 1.5);
    std::uniform_real_distribution<double> variance(0.8, 1.25);
    const double lo = -16.0;
    const double hi = 16.0;
    const int cells = 2000;
    double worst_excess = 0.0;
    double worst_bhatt = 0.0;
    double worst_sym = 0.0;
    std::string worst_name;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t labels = trial % 2 == 0 ? 1 : 2;
        std::vector<oracle::Track1d> ta;
        std::vector<oracle::Track1d> tb;
        for (std::size_t l = 0; l < labels; ++l) {
            ta.push_back({existence(gen), mean(gen), variance(gen)});
            tb.push_back({existence(gen), mean(gen), variance(gen)});
        }
        const auto a = oracle::make_lmb(ta);
        const auto b = oracle::make_lmb(tb);
        const GridSums g = grid_sums(ta, tb, lo, hi, cells);
        const std::vector<std::pair<std::string, std::pair<double, double>>> checks{
            {"renyi(0.3)", {renyi_lmb(a, b, 0.3), std::log(g.renyi03) / (0.3 - 1.0)}},
            {"renyi(0.5)", {renyi_lmb(a, b, 0.5), std::log(g.renyi05) / (0.5 - 1.0)}},
            {"renyi(0.7)", {renyi_lmb(a, b, 0.7), std::log(g.renyi07) / (0.7 - 1.0)}},
            {"kl", {kl_lmb(a, b), g.kl}},
            {"chi2", {chi2_lmb(a, b), g.chi2 - 1.0}},
            {"cs", {csd_lmb(a, b), -std::log(g.ab) + 0.5 * std::log(g.aa) + 0.5 * std::log(g.bb)}},
            {"bhattacharyya", {bhattacharyya_lmb(a, b), -2.0 * std::log(g.renyi05)}},
        };
        for (const auto& [name, values] : checks) {
            const auto [closed, brute] = values;
            const double tolerance = std::max(1e-6, 1e-4 * std::abs(brute));
            const double excess = std::abs(closed - brute) / tolerance;
            if (!(excess <= worst_excess)) {
                worst_excess = std::isnan(excess) ? kInf : excess;
                worst_name = name;
            }
        }
        worst_bhatt = std::max(worst_bhatt, std::abs(bhattacharyya_lmb(a, b) - renyi_lmb(a, b, 0.5)));
        worst_sym = std::max(worst_sym, std::abs(csd_lmb(a, b) - csd_lmb(b, a)));
    }
    const double elapsed = seconds_since(start);
    const bool pass = worst_excess <= 1.0 && worst_bhatt <= 1e-12 && worst_sym <= 1e-12 && elapsed < 60.0;
    return {pass, "worst error/tolerance " + fmt(worst_excess) + " (" + worst_name + "), bhattacharyya-renyi(0.5) "
                      + fmt(worst_bhatt) + ", cs asymmetry " + fmt(worst_sym) + ", " + fmt(elapsed) + " s"};
}

// ---- 5. subset-sum and set-exponential identities ----------------------------------------

Outcome set_identity_checks()
{
    std::mt19937_64 gen(505);
    std::uniform_real_distribution<double> positive(0.1, 3.0);
    double worst_subset = 0.0;
    double worst_lmb = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = trial % 6;
        std::vector<double> g(n);
        std::vector<double> h(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = positive(gen);
            h[i] = positive(gen);
        }
        double rhs = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            rhs *= g[i] + h[i];
        }
        double lhs = 0.0;
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            double term = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                term *= ((mask >> i) & 1U) ? g[i] : h[i];
            }
            lhs += term;
        }
        worst_subset = std::max(worst_subset, std::abs(lhs - rhs) / rhs);

        // Same identity through the library: an LMB with r = g / (g + h)
        // has joint existence Π r^L (1 - r)^(S - L).
        std::vector<oracle::Track1d> tracks;
        for (std::size_t i = 0; i < n; ++i) {
            tracks.push_back({g[i] / (g[i] + h[i]), 0.0, 1.0});
        }
        const GlmbDensity lmb = GlmbDensity::from_lmb(oracle::make_lmb(tracks));
        LabelSet all;
        for (std::size_t i = 0; i < n; ++i) {
            all.push_back(Label{0, static_cast<int>(i) + 1});
        }
        double via_library = 0.0;
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            LabelSet subset;
            double term = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if ((mask >> i) & 1U) {
                    subset.push_back(all[i]);
                }
                term *= ((mask >> i) & 1U) ? g[i] : h[i];
            }
            const double scaled = joint_existence(lmb, subset) * rhs;
            worst_lmb = std::max(worst_lmb, std::abs(scaled - term) / rhs);
            via_library += scaled;
        }
        worst_lmb = std::max(worst_lmb, std::abs(via_library - rhs) / rhs);
    }

    // ∫ Δ(X) f^X δX = Π_ℓ (1 + ⟨f(·, ℓ)⟩) over a two-label pool.
    const auto grid = AttributeGrid::line(-12.0, 12.0, 300);
    const LabelSet pool{Label{0, 1}, Label{0, 2}, Label{1, 1}};
    const std::map<Label, std::pair<double, double>> scale_and_mean{
        {Label{0, 1}, {0.7, -1.0}}, {Label{0, 2}, {1.9, 0.5}}, {Label{1, 1}, {0.3, 2.0}}};
    auto f = [&](const Label& l, double x) {
        const auto& [scale, mu] = scale_and_mean.at(l);
        return scale * oracle::normal_pdf(x, mu, 1.2);
    };
    const double integral = set_integral_oracle(
        [&](const LabeledSet& x) {
            double value = 1.0;
            for (const auto& s : x) {
                value *= f(s.label, s.x(0));
            }
            return value;
        },
        grid, pool, pool.size());
    double expected = 1.0;
    for (const auto& [label, sm] : scale_and_mean) {
        expected *= 1.0 + sm.first;
    }
    const double exponential_error = std::abs(integral - expected) / expected;
    const bool pass = worst_subset <= 1e-12 && worst_lmb <= 1e-12 && exponential_error <= 1e-3;
    return {pass, "subset identity " + fmt(worst_subset) + ", via LMB joint existence " + fmt(worst_lmb)
                      + ", set-exponential integral " + fmt(exponential_error)};
}

// ---- 6. multi-scan consistency ---------------------------------------------------------

MultiObjectModel toy_model(double ps, double pd, double clutter)
{
    return MultiObjectModel{scalar_survival(ps, 0.5), scalar_observation(pd, 0.5, clutter), MixtureHygiene{}};
}

BirthModel toy_births(int k, const std::vector<std::pair<double, double>>& prob_and_mean)
{
    std::vector<BirthEntry> entries;
    for (std::size_t i = 0; i < prob_and_mean.size(); ++i) {
        entries.push_back({Label{k, static_cast<int>(i) + 1}, prob_and_mean[i].first,
                           oracle::gaussian_1d(prob_and_mean[i].second, 2.0)});
    }
    return BirthModel(k, std::move(entries));
}

/// Every valid joint association over the given scans, by recursion on scans.
std::vector<JointAssociation> enumerate_joint(std::span<const ScanData> scans)
{
    std::vector<JointAssociation> out;
    std::function<void(std::size_t, LabelSet, JointAssociation)> recurse = [&](std::size_t s, LabelSet alive,
                                                                             JointAssociation partial) {
        if (s == scans.size()) {
            out.push_back(partial);
            return;
        }
        LabelSet domain = alive;
        for (const auto& e : scans[s].birth.entries()) {
            domain.push_back(e.label);
        }
        std::sort(domain.begin(), domain.end());
        const int m = static_cast<int>(scans[s].z.size());
        for (const auto& gamma : oracle::all_valid_associations(static_cast<int>(domain.size()), m)) {
            ScanAssociation record{scans[s].k, {}};
            LabelSet next;
            for (std::size_t i = 0; i < domain.size(); ++i) {
                record.entries.emplace_back(domain[i], gamma[i]);
                if (gamma[i] >= 0) {
                    next.push_back(domain[i]);
                }
            }
            JointAssociation extended = partial;
            extended.records.push_back(record);
            recurse(s + 1, next, std::move(extended));
        }
    };
    recurse(0, {}, JointAssociation{});
    return out;
}

std::string joint_key(const JointAssociation& gamma)
{
    std::string s;
    for (const auto& r : gamma.records) {
        s += std::to_string(r.scan) + "{";
        for (const auto& [label, v] : r.entries) {
            s += to_string(label) + ":" + std::to_string(v) + ";";
        }
        s += "}";
    }
    return s;
}

Outcome multiscan_consistency()
{
    std::mt19937_64 gen(606);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    double worst_marginal = 0.0;
    bool structure_ok = true;
    for (int toy = 0; toy < 10; ++toy) {
        const auto model = toy_model(0.6 + 0.39 * unit(gen), 0.4 + 0.5 * unit(gen), 1.0 + 4.0 * unit(gen));
        std::vector<ScanData> scans;
        int labels_left = 2;
        for (int k = 0; k < 2; ++k) {
            const int births = k == 0 ? 1 + static_cast<int>(gen() % 2) : static_cast<int>(gen() % (labels_left + 1));
            labels_left -= births;
            std::vector<std::pair<double, double>> entries;
            for (int b = 0; b < births; ++b) {
                entries.emplace_back(0.1 + 0.8 * unit(gen), coord(gen));
            }
            Measurements z;
            const int m = static_cast<int>(gen() % 3);
            for (int j = 0; j < m; ++j) {
                z.push_back(point(coord(gen)));
            }
            scans.push_back({k, std::move(z), toy_births(k, entries)});
        }
        MultiScanGlmb post = MultiScanGlmb::empty(0);
        GlmbDensity filter;
        for (const auto& s : scans) {
            post = msglmb_extend(post, s.z, s.birth, model.survival, model.observation, 0, exhaustive());
            filter = joint_step(filter, s.z, s.birth, model.survival, model.observation, exhaustive()).posterior;
        }
        const auto marginal = final_scan_marginal(post);
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < filter.size(); ++i) {
            const auto& h = filter.hypotheses()[i];
            index[labels_key(h.labels) + "|" + history_key(h.history)] = i;
        }
        structure_ok = structure_ok && marginal.size() == filter.size();
        for (std::size_t i = 0; i < marginal.size(); ++i) {
            const auto& h = marginal.hypotheses()[i];
            const auto it = index.find(labels_key(h.labels) + "|" + history_key(h.history));
            if (it == index.end()) {
                structure_ok = false;
                continue;
            }
            worst_marginal = std::max(worst_marginal, std::abs(marginal.weight(i) / filter.weight(it->second) - 1.0));
        }
    }

    // Multi-scan Gibbs against the enumerated history law on a fixed toy.
    const auto model = toy_model(0.85, 0.7, 60.0);
    const std::vector<ScanData> scans{{0, {point(0.2), point(1.1)}, toy_births(0, {{0.5, 0.0}, {0.4, 1.0}})},
                                      {1, {point(0.5), point(1.4)}, toy_births(1, {})}};
    TrajectoryEvaluator eval(scans, model);
    const auto all = enumerate_joint(scans);
    std::map<std::string, double> exact;
    std::vector<double> logs;
    for (const auto& gamma : all) {
        logs.push_back(eval.log_weight(gamma));
    }
    const double log_total = log_sum_exp(logs);
    for (std::size_t i = 0; i < all.size(); ++i) {
        exact[joint_key(all[i])] = std::exp(logs[i] - log_total);
    }
    MultiScanGibbsChain chain(eval, all.front(), 77, 0);
    std::map<std::string, double> empirical;
    const int sweeps = 100000;
    bool exact_support = true;
    for (int t = 0; t < sweeps; ++t) {
        chain.sweep();
        const auto key = joint_key(chain.state());
        exact_support = exact_support && exact.contains(key);
        empirical[key] += 1.0 / sweeps;
    }
    const double tv = oracle::total_variation(empirical, exact);
    const bool pass = structure_ok && worst_marginal <= 1e-9 && exact_support && tv < 0.03;
    return {pass, "final-scan marginal max relative error " + fmt(worst_marginal) + ", multi-scan Gibbs TV "
                      + fmt(tv) + " over " + std::to_string(exact.size()) + " histories"};
}

// ---- 7. tracking quality ---------------------------------------------------------------

TrackerConfig acceptance_tracker_config()
{
    TrackerConfig cfg;
    cfg.filter.gibbs_iterations = 200;
    cfg.filter.max_hypotheses = 1000;
    cfg.filter.seed = 7;
    cfg.filter.threads = 1;
    return cfg;
}

double mean_ospa(const Scenario& scenario, std::span<const ScanOutput> scans, const LinearGaussianSensor& sensor)
{
    const auto truth = project(scenario.truth, sensor);
    double total = 0.0;
    for (const auto& s : scans) {
        std::vector<Vector> estimated;
        for (const auto& e : s.estimates) {
            estimated.push_back(sensor.observation() * e.mean);
        }
        total += ospa(states_at(truth, s.k), estimated, 100.0, 1.0);
    }
    return total / static_cast<double>(scans.size());
}

Outcome tracking_quality()
{
    const auto start = Clock::now();
    const Scenario scenario = desk_scale_scenario(2024);
    const TrackerConfig cfg = acceptance_tracker_config();
    const auto inputs = tracker_inputs(scenario, cfg);
    const auto model = make_tracker_model(scenario, cfg);
    const auto scans = run_glmb_tracker(inputs, model, cfg);
    const double elapsed = seconds_since(start);

    int counted = 0;
    int within = 0;
    for (const auto& s : scans) {
        if (s.k <= 10) {
            continue;
        }
        ++counted;
        const auto truth_count = static_cast<long>(states_at(scenario.truth, s.k).size());
        within += std::abs(static_cast<long>(s.estimates.size()) - truth_count) <= 1 ? 1 : 0;
    }
    const double fraction = static_cast<double>(within) / counted;

    // Prediction-only baseline: the same recursion with no measurement update.
    GlmbDensity predicted;
    std::vector<ScanOutput> baseline;
    for (const auto& scan : inputs) {
        predicted = truncate(glmb_predict(predicted, scan.birth, model.survival), cfg.filter.max_hypotheses).density;
        baseline.push_back({scan.k, estimate(predicted, cfg.estimator), {}, 0.0});
    }
    const auto sensor = model.observation.sensor;
    const double filter_ospa = mean_ospa(scenario, scans, sensor);
    const double baseline_ospa = mean_ospa(scenario, baseline, sensor);
    const bool pass = fraction >= 0.9 && filter_ospa <= 0.5 * baseline_ospa && elapsed < 120.0;
    return {pass, "cardinality within 1 on " + fmt(100.0 * fraction) + "% of scans, mean OSPA " + fmt(filter_ospa)
                      + " m vs baseline " + fmt(baseline_ospa) + " m, filter " + fmt(elapsed) + " s"};
}

// ---- 8. LMB filter existence matching --------------------------------------------------

Outcome lmb_existence_matching()
{
    const Scenario scenario = desk_scale_scenario(2024);
    TrackerConfig cfg = acceptance_tracker_config();
    const auto inputs = tracker_inputs(scenario, cfg);
    const auto model = make_tracker_model(scenario, cfg);
    LmbDensity lmb;
    double worst = 0.0;
    bool pruned_ok = true;
    for (std::size_t s = 0; s < 20 && s < inputs.size(); ++s) {
        const auto step = lmb_filter_step_detailed(lmb, inputs[s].z, inputs[s].birth, model.survival,
                                                   model.observation, cfg.filter);
        std::map<Label, double> sums;
        for (std::size_t i = 0; i < step.intermediate.size(); ++i) {
            for (const auto& l : step.intermediate.hypotheses()[i].labels) {
                sums[l] += step.intermediate.weight(i);
            }
        }
        for (const auto& [label, sum] : sums) {
            const auto* track = step.posterior.find(label);
            if (track == nullptr) {
                pruned_ok = pruned_ok && sum < cfg.filter.existence_threshold;
                continue;
            }
            worst = std::max(worst, std::abs(track->existence() - sum));
        }
        for (const auto& [label, track] : step.posterior.tracks()) {
            pruned_ok = pruned_ok && sums.contains(label);
        }
        lmb = step.posterior;
    }
    return {worst <= 1e-12 && pruned_ok, "max |r - Σ w| " + fmt(worst) + " over 20 scans"};
}

// ---- 9. OSPA axioms ----------------------------------------------------------------------

Outcome ospa_axioms()
{
    std::mt19937_64 gen(909);
    std::uniform_int_distribution<int> count(0, 6);
    std::uniform_real_distribution<double> coord(0.0, 300.0);
    auto random_set = [&]() {
        std::vector<Vector> out(static_cast<std::size_t>(count(gen)));
        for (auto& v : out) {
            v = Vector{{coord(gen), coord(gen)}};
        }
        return out;
    };
    bool symmetric = true;
    bool identity = true;
    double worst_triangle = -kInf;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto a = random_set();
        const auto b = random_set();
        const auto c = random_set();
        const double p = trial % 2 == 0 ? 1.0 : 2.0;
        const double ab = ospa(a, b, 100.0, p);
        symmetric = symmetric && ab == ospa(b, a, 100.0, p);
        identity = identity && ospa(a, a, 100.0, p) == 0.0;
        worst_triangle = std::max(worst_triangle, ospa(a, c, 100.0, p) - ab - ospa(b, c, 100.0, p));
    }
    return {symmetric && identity && worst_triangle <= 1e-9,
            std::string("symmetry ") + (symmetric ? "exact" : "violated") + ", identity "
                + (identity ? "exact" : "violated") + ", max triangle excess " + fmt(worst_triangle)};
}

// ---- 10. determinism ------------------------------------------------------------------------

std::string filter_output(const Scenario& scenario, unsigned threads)
{
    TrackerConfig cfg = acceptance_tracker_config();
    cfg.filter.threads = threads;
    const auto inputs = tracker_inputs(scenario, cfg);
    const auto model = make_tracker_model(scenario, cfg);
    return io::tracks_to_json(io::track_records(run_glmb_tracker(inputs, model, cfg))).dump();
}

std::string smoother_output(const Scenario& scenario, unsigned threads)
{
    TrackerConfig cfg = acceptance_tracker_config();
    cfg.filter.threads = threads;
    cfg.filter.gibbs_iterations = 50;
    cfg.filter.max_hypotheses = 100;
    const auto inputs = tracker_inputs(scenario, cfg);
    const auto model = make_tracker_model(scenario, cfg);
    const SmootherConfig smoother{cfg.filter, 3, 20, 2};
    const auto post = run_smoother(inputs, model, smoother);
    const auto estimates = estimate_trajectories(post, TrajectoryEstimatorKind::top_hypothesis, model.survival.motion);
    return io::tracks_to_json(io::track_records(estimates)).dump();
}

Outcome determinism()
{
    SimParams params = desk_scale_params();
    params.scans = 25;
    const Scenario scenario = generate(params, 31);
    bool same = true;
    for (const unsigned threads : {1U, 2U}) {
        same = same && filter_output(scenario, threads) == filter_output(scenario, threads);
        same = same && smoother_output(scenario, threads) == smoother_output(scenario, threads);
    }
    return {same, same ? "filter and smoother outputs byte-identical at 1 and 2 threads" : "outputs differ"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"two-path GLMB equivalence", two_path_equivalence},
        {"Gibbs stationarity", gibbs_stationarity},
        {"truncation accounting", truncation_accounting},
        {"divergence oracle suite", divergence_suite},
        {"subset and set-exponential identities", set_identity_checks},
        {"multi-scan consistency", multiscan_consistency},
        {"tracking quality on the desk-scale scenario", tracking_quality},
        {"LMB existence matching", lmb_existence_matching},
        {"OSPA metric axioms", ospa_axioms},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome{false, ""};
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        failures += outcome.pass ? 0 : 1;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first << " ("
                  << outcome.detail << ")" << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failures == 0 ? 0 : 1;
}
