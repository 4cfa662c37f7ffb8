#include "qrec/dimension.hpp"

#include "qrec/errors.hpp"
#include "qrec/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qrec {

namespace {

constexpr std::size_t kMaxSegments = std::size_t{1} << 22;

// Free segments S = (s_0, ..., s_N) with fixed ends and SMB-regular chain mass.
std::vector<Word> regular_segments(const MapModel& map, Digit first, Digit last, std::size_t N, double h, double eps) {
    const auto D = static_cast<Digit>(map.digits());
    const double total = std::pow(static_cast<double>(D), static_cast<double>(N - 1));
    if (total > static_cast<double>(kMaxSegments))
        throw InvalidArgument("level size " + std::to_string(N) + " too large for exact enumeration");
    const double lo = -static_cast<double>(N) * (h + eps), hi = -static_cast<double>(N) * (h - eps);
    std::vector<Word> out;
    Word w(N + 1, 0);
    w[0] = first;
    w[N] = last;
    const auto count = static_cast<std::uint64_t>(total);
    for (std::uint64_t code = 0; code < count; ++code) {
        std::uint64_t c = code;
        for (std::size_t k = N - 1; k >= 1; --k) {
            w[k] = static_cast<Digit>(c % static_cast<std::uint64_t>(D));
            c /= static_cast<std::uint64_t>(D);
        }
        bool ok = true;
        for (std::size_t k = 0; k < N && ok; ++k) ok = map.admissible(w[k], w[k + 1]);
        if (!ok) continue;
        const double lm = log_of(word_mass(map, w));
        if (lm > lo && lm < hi) out.push_back(w);
    }
    return out;
}

// Product of transition probabilities along a word (mass relative to its first block).
Rational relative_mass(const MapModel& map, const Word& w) {
    Rational r = 1;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) r *= map.transition()[w[k]][w[k + 1]];
    return r;
}

}  // namespace

Word CantorStage::word(std::size_t index) const {
    const StageBlock& b = blocks.at(index);
    if (b.level == 0) return {x0_word.front()};
    if (!b.tilde) {
        Word w = word(static_cast<std::size_t>(b.parent));
        const std::size_t k = levels[b.level].k;
        w.insert(w.end(), x0_word.begin() + 1, x0_word.begin() + 1 + static_cast<long>(k));
        return w;
    }
    Word w = word(static_cast<std::size_t>(b.parent));
    w.pop_back();
    const Word& s = segments[b.level][static_cast<std::size_t>(b.segment)];
    w.insert(w.end(), s.begin(), s.end());
    return w;
}

CantorStage build_cantor_stage(const MapModel& map, const TargetPoint& x0, const Schedule& sched,
                               const std::vector<std::size_t>& level_sizes, const StageOptions& opts) {
    if (!map.is_linear()) throw InvalidArgument("Cantor stages need a DAryShift or MarkovLinear map");
    if (level_sizes.empty() || level_sizes.size() > 3) throw InvalidArgument("need between 1 and 3 levels");
    for (std::size_t j = 0; j < level_sizes.size(); ++j) {
        if (level_sizes[j] < 1) throw InvalidArgument("level sizes must be positive");
    }
    CantorStage st;
    st.map_id = map.id();
    st.x0_word = x0.word;
    st.epsilon = opts.epsilon;
    st.entropy = entropy_closed_form(map, InvariantMeasure::natural_for(map)).value;
    const Digit i0 = x0.word.front();

    // Images P(k, x0) used to place J_j inside J̃_j.
    auto image_of = [&](std::size_t k) {
        if (k + 1 > x0.word.size()) throw InvalidArgument("target word too short for refinement depth " + std::to_string(k));
        return cylinder_from_word(map, std::span<const Digit>(x0.word).first(k + 1));
    };
    const Interval top = map.block(i0);

    StageLevel l0;
    l0.count = 1;
    st.levels.push_back(l0);
    st.blocks.push_back({top.left, top.right, Rational(1), 0, false, -1, -1});
    st.j_index.push_back({0});
    st.tilde_index.push_back({});
    st.segments.push_back({});

    std::size_t prev_len = 1;  // digits in a J_{j-1} word
    Digit prev_last = i0;
    for (std::size_t j = 1; j <= level_sizes.size(); ++j) {
        StageLevel lv;
        lv.N = level_sizes[j - 1];
        lv.d = prev_len + lv.N - 1;
        if (sched.is_radii()) {
            const double r = sched.radius(lv.d);
            const double rr[1] = {r};
            lv.k = refine_schedule_to_depths(map, x0.value, x0.word, rr).front();
        } else {
            lv.k = sched.depth(lv.d);
        }
        lv.degenerate = lv.k == 0;
        const Cylinder img = image_of(lv.k);
        if (!lv.degenerate && !(img.left > top.left && img.right < top.right))
            throw InvalidArgument("containment hypothesis violated at level " + std::to_string(j) +
                                  ": closure of P(" + std::to_string(lv.k) + ", x0) is not inside P(0, x0)");
        std::vector<Word> segs = regular_segments(map, prev_last, i0, lv.N, st.entropy, opts.epsilon);
        if (segs.empty())
            throw InvalidArgument("SMB-regular family empty at level " + std::to_string(j) + " (N = " +
                                  std::to_string(lv.N) + ", epsilon = " + std::to_string(opts.epsilon) + ")");

        // Affine data per segment: its cylinder inside P_{first}, relative to that block.
        const Interval first_block = map.block(prev_last);
        std::vector<Rational> seg_lo, seg_hi, seg_w;
        Rational W = 0;
        for (const Word& s : segs) {
            Cylinder c = cylinder_from_word(map, s);
            seg_lo.push_back((c.left - first_block.left) / first_block.length());
            seg_hi.push_back((c.right - first_block.left) / first_block.length());
            seg_w.push_back(relative_mass(map, s));
            W += seg_w.back();
        }
        const Interval landing = map.block(i0);
        const Rational in_lo = (img.left - landing.left) / landing.length();
        const Rational in_hi = (img.right - landing.left) / landing.length();

        st.segments.push_back(segs);
        st.tilde_index.emplace_back();
        st.j_index.emplace_back();
        double amin = 1e300, amax = 0, gmin = 1e300, dmin = 1e300;
        for (std::size_t pj : st.j_index[j - 1]) {
            const StageBlock parent = st.blocks[pj];
            const Rational plen = parent.lambda();
            Rational covered = 0;
            for (std::size_t s = 0; s < segs.size(); ++s) {
                StageBlock t;
                t.left = parent.left + plen * seg_lo[s];
                t.right = parent.left + plen * seg_hi[s];
                t.nu = parent.nu * seg_w[s] / W;
                t.level = static_cast<int>(j);
                t.tilde = true;
                t.parent = static_cast<long>(pj);
                t.segment = static_cast<long>(s);
                const Rational tlen = t.lambda();
                covered += tlen;
                const double ratio = Rational(tlen / plen).get_d();
                amin = std::min(amin, ratio);
                amax = std::max(amax, ratio);
                StageBlock b;
                b.left = t.left + tlen * in_lo;
                b.right = t.left + tlen * in_hi;
                b.nu = t.nu;
                b.level = static_cast<int>(j);
                b.tilde = false;
                b.parent = static_cast<long>(st.blocks.size());
                gmin = std::min(gmin, Rational(b.lambda() / tlen).get_d());
                st.tilde_index[j].push_back(st.blocks.size());
                st.blocks.push_back(std::move(t));
                st.j_index[j].push_back(st.blocks.size());
                st.blocks.push_back(std::move(b));
            }
            dmin = std::min(dmin, Rational(covered / plen).get_d());
        }
        lv.count = st.j_index[j].size();
        lv.alpha = amin;
        lv.beta = amax;
        lv.gamma = gmin;
        lv.delta = dmin;
        st.levels.push_back(lv);

        if (opts.keep_intermediate) {
            // Prefixes of the free segments strictly between J_{j-1} and J̃_j.
            std::map<Word, std::pair<Rational, Rational>> trie;  // prefix -> (Σ w_S below, own relative mass)
            for (std::size_t s = 0; s < segs.size(); ++s)
                for (std::size_t len = 2; len <= lv.N; ++len) {
                    Word pre(segs[s].begin(), segs[s].begin() + static_cast<long>(len));
                    auto [it, fresh] = trie.try_emplace(pre, Rational(0), Rational(0));
                    if (fresh) it->second.second = relative_mass(map, pre);
                    it->second.first += seg_w[s];
                }
            std::vector<std::pair<double, double>> rel;  // (log ν share, log λ factor)
            for (const auto& [pre, v] : trie) rel.emplace_back(log_of(Rational(v.first / W)), log_of(v.second));
            for (std::size_t pj : st.j_index[j - 1]) {
                const double lnu = log_of(st.blocks[pj].nu), llam = log_of(st.blocks[pj].lambda());
                for (const auto& [a, b] : rel) st.intermediate.emplace_back(lnu + a, llam + b);
            }
        }
        prev_len = prev_len + lv.N + lv.k;
        prev_last = x0.word[lv.k];
    }

    // Largest Λ satisfying the level inequality on this finite stage.
    double lam = 1e300;
    double num = 0.0, den = 0.0;
    const std::size_t m = st.depth();
    for (std::size_t j = 1; j <= m; ++j) {
        const StageLevel& lv = st.levels[j];
        num += std::log(lv.beta / lv.delta);
        den += std::log(lv.alpha * lv.gamma);
        const double next_delta = j < m ? st.levels[j + 1].delta : lv.delta;
        const double lhs = num - std::log(next_delta);
        if (den < 0) lam = std::min(lam, lhs / den);
    }
    st.lambda_hypothesis = lam == 1e300 ? 0.0 : lam;
    if (!(st.lambda_hypothesis > 0) && st.levels.size() > 1 && !st.levels[1].degenerate)
        throw InvalidArgument("level-size hypothesis fails: no positive constant fits this stage");
    return st;
}

StageCheck check_stage(const MapModel& map, const CantorStage& stage) {
    (void)map;
    StageCheck out;
    for (std::size_t j = 1; j <= stage.depth(); ++j) {
        const StageLevel& lv = stage.levels[j];
        for (std::size_t ti : stage.tilde_index[j]) {
            const StageBlock& t = stage.blocks[ti];
            const StageBlock& p = stage.blocks[static_cast<std::size_t>(t.parent)];
            if (!(t.left >= p.left && t.right <= p.right)) ++out.nesting_violations;
            const double r = Rational(t.lambda() / p.lambda()).get_d();
            if (r < lv.alpha * (1 - 1e-12) || r > lv.beta * (1 + 1e-12)) ++out.ratio_violations;
        }
        for (std::size_t bi : stage.j_index[j]) {
            const StageBlock& b = stage.blocks[bi];
            const StageBlock& t = stage.blocks[static_cast<std::size_t>(b.parent)];
            const bool inside = lv.degenerate ? (b.left >= t.left && b.right <= t.right)
                                              : (b.left > t.left && b.right < t.right);
            if (!inside) ++out.nesting_violations;
            if (b.nu != t.nu) ++out.nesting_violations;
            if (Rational(b.lambda() / t.lambda()).get_d() < lv.gamma * (1 - 1e-12)) ++out.ratio_violations;
        }
    }
    for (std::size_t j = 0; j <= stage.depth(); ++j) {
        Rational s = 0;
        for (std::size_t bi : stage.j_index[j]) s += stage.blocks[bi].nu;
        out.level_sums.push_back(s);
        if (s != 1) out.sums_exact_one = false;
        if (j > 0) {
            Rational st = 0;
            for (std::size_t ti : stage.tilde_index[j]) st += stage.blocks[ti].nu;
            if (st != 1) out.sums_exact_one = false;
        }
    }
    return out;
}

double stage_cantor_lambda(const CantorStage& stage) {
    if (stage.depth() < 1) throw InvalidArgument("stage has no levels");
    double a = 0, b = 1e300, c = 0, delta = 1;
    std::vector<double> sizes;
    for (std::size_t j = 1; j <= stage.depth(); ++j) {
        const StageLevel& lv = stage.levels[j];
        const double N = static_cast<double>(lv.N);
        a = std::max(a, -std::log(lv.alpha) / N);
        b = std::min(b, -std::log(lv.beta) / N);
        c = std::max(c, -std::log(lv.gamma) / N);
        delta = std::min(delta, lv.delta);
        sizes.push_back(N);
    }
    return cantor_lambda(a, b, c, delta, sizes);
}

nlohmann::json to_json(const CantorStage& stage, std::size_t max_blocks) {
    nlohmann::json levels = nlohmann::json::array();
    for (std::size_t j = 0; j < stage.levels.size(); ++j) {
        const StageLevel& lv = stage.levels[j];
        levels.push_back({{"j", j},
                          {"N", lv.N},
                          {"k", lv.k},
                          {"d", lv.d},
                          {"count", lv.count},
                          {"alpha", lv.alpha},
                          {"beta", lv.beta},
                          {"gamma", lv.gamma},
                          {"delta", lv.delta},
                          {"degenerate", lv.degenerate}});
    }
    nlohmann::json blocks = nlohmann::json::array();
    const std::size_t n = std::min(max_blocks, stage.blocks.size());
    for (std::size_t i = 0; i < n; ++i) {
        const StageBlock& b = stage.blocks[i];
        blocks.push_back({{"word", stage.word(i)},
                          {"level", b.level},
                          {"family", b.tilde ? "J~" : "J"},
                          {"parent", b.parent},
                          {"left", to_string(b.left)},
                          {"right", to_string(b.right)},
                          {"lambda", to_string(b.lambda())},
                          {"nu", to_string(b.nu)}});
    }
    return {{"map", stage.map_id},
            {"epsilon", stage.epsilon},
            {"entropy", stage.entropy},
            {"lambda_hypothesis", stage.lambda_hypothesis},
            {"levels", levels},
            {"blocks", blocks},
            {"block_count", stage.blocks.size()},
            {"truncated", n < stage.blocks.size()}};
}

nlohmann::json to_json(const FrostmanResult& f) {
    return {{"gamma", f.gamma},   {"cap", f.cap},           {"slope", f.slope},
            {"intercept", f.intercept}, {"residual_rms", f.residual_rms}, {"blocks", f.blocks}};
}

FrostmanResult frostman_exponent(const CantorStage& stage, double cap) {
    if (!(cap > 1)) throw InvalidArgument("Frostman cap must exceed 1");
    if (stage.depth() < 2) throw InvalidArgument("insufficient resolution: need at least two construction levels");
    std::vector<std::pair<double, double>> pts = stage.intermediate;  // (log ν, log λ)
    for (const StageBlock& b : stage.blocks) pts.emplace_back(log_of(b.nu), log_of(b.lambda()));
    if (pts.size() < 10) throw InvalidArgument("insufficient resolution: fewer than 10 blocks");
    FrostmanResult f;
    f.cap = cap;
    f.blocks = pts.size();
    const double lc = std::log(cap);
    double gamma = 1.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [lnu, llam] : pts) {
        if (llam < 0) gamma = std::min(gamma, (lc - lnu) / (-llam));
        sx += llam;
        sy += lnu;
        sxx += llam * llam;
        sxy += llam * lnu;
    }
    const double n = static_cast<double>(pts.size());
    const double den = n * sxx - sx * sx;
    f.slope = den != 0 ? (n * sxy - sx * sy) / den : 0.0;
    f.intercept = (sy - f.slope * sx) / n;
    double rss = 0;
    for (auto [lnu, llam] : pts) rss += std::pow(lnu - f.intercept - f.slope * llam, 2);
    f.residual_rms = std::sqrt(rss / n);
    f.gamma = std::max(0.0, gamma);
    return f;
}

}  // namespace qrec
