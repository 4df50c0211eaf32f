#include "flowsynth/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace flowsynth {
namespace {

void require_same_dims(const auto &a, const auto &b, const char *op) {
    if (!dims_match(a, b)) {
        throw ConsistencyError(std::string(op) + ": prediction is " + std::to_string(a.width()) + "x" +
                               std::to_string(a.height()) + ", ground truth is " + std::to_string(b.width()) + "x" +
                               std::to_string(b.height()));
    }
}

BinaryMask dilate_disk(const BinaryMask &mask, int radius) {
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (dx * dx + dy * dy <= radius * radius) offsets.emplace_back(dx, dy);
        }
    }
    Plane<std::uint8_t> out(mask.width(), mask.height(), 0);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask(x, y)) continue;
            for (const auto &[dx, dy] : offsets) {
                const int nx = x + dx;
                const int ny = y + dy;
                if (nx >= 0 && ny >= 0 && nx < mask.width() && ny < mask.height()) out(nx, ny) = 1;
            }
        }
    }
    return BinaryMask(std::move(out));
}

std::size_t count_and(const BinaryMask &a, const BinaryMask &b) {
    const auto av = a.plane().values();
    const auto bv = b.plane().values();
    std::size_t n = 0;
    for (std::size_t i = 0; i < av.size(); ++i) n += (av[i] & bv[i]);
    return n;
}

double f_score(double tp, double predicted, double actual, double beta_sq) {
    const double precision = predicted > 0 ? tp / predicted : 0.0;
    const double recall = actual > 0 ? tp / actual : 0.0;
    const double denom = beta_sq * precision + recall;
    return denom > 0 ? (1.0 + beta_sq) * precision * recall / denom : 0.0;
}

const std::array<double, kFBetaThresholds> &fbeta_thresholds() {
    static const auto table = [] {
        std::array<double, kFBetaThresholds> t{};
        for (int k = 0; k < kFBetaThresholds; ++k) t[static_cast<std::size_t>(k)] = k / 255.0;
        return t;
    }();
    return table;
}

} // namespace

double region_j(const BinaryMask &pred, const BinaryMask &gt) {
    require_same_dims(pred, gt, "region_j");
    const auto p = pred.plane().values();
    const auto g = gt.plane().values();
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        inter += (p[i] & g[i]);
        uni += (p[i] | g[i]);
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask boundary_map(const BinaryMask &mask) {
    const int w = mask.width();
    const int h = mask.height();
    Plane<std::uint8_t> out(w, h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool s = mask(x, y);
            const bool east = x + 1 < w && mask(x + 1, y);
            const bool south = y + 1 < h && mask(x, y + 1);
            const bool south_east = x + 1 < w && y + 1 < h && mask(x + 1, y + 1);
            bool edge;
            if (x == w - 1 && y == h - 1) {
                edge = false;
            } else if (y == h - 1) {
                edge = s != east;
            } else if (x == w - 1) {
                edge = s != south;
            } else {
                edge = (s != east) || (s != south) || (s != south_east);
            }
            out(x, y) = edge ? 1 : 0;
        }
    }
    return BinaryMask(std::move(out));
}

int boundary_tolerance(int width, int height) {
    const double diagonal = std::sqrt(static_cast<double>(width) * width + static_cast<double>(height) * height);
    return static_cast<int>(std::ceil(0.008 * diagonal));
}

double boundary_f(const BinaryMask &pred, const BinaryMask &gt) {
    require_same_dims(pred, gt, "boundary_f");
    const BinaryMask pb = boundary_map(pred);
    const BinaryMask gb = boundary_map(gt);
    const std::size_t n_pred = pb.count();
    const std::size_t n_gt = gb.count();
    if (n_pred == 0 && n_gt == 0) return 1.0;
    if (n_pred == 0 || n_gt == 0) return 0.0;

    const int radius = boundary_tolerance(pred.width(), pred.height());
    const double precision = static_cast<double>(count_and(pb, dilate_disk(gb, radius))) / static_cast<double>(n_pred);
    const double recall = static_cast<double>(count_and(gb, dilate_disk(pb, radius))) / static_cast<double>(n_gt);
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

double g_mean(double j, double f) { return (j + f) / 2.0; }

double mae(const SaliencyMap &pred, const BinaryMask &gt) {
    require_same_dims(pred, gt, "mae");
    const auto p = pred.plane().values();
    const auto g = gt.plane().values();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::fabs(static_cast<double>(p[i]) - g[i]);
    return sum / static_cast<double>(p.size());
}

double f_beta_at(const SaliencyMap &pred, const BinaryMask &gt, double threshold, double beta_sq) {
    require_same_dims(pred, gt, "f_beta");
    const auto p = pred.plane().values();
    const auto g = gt.plane().values();
    std::size_t tp = 0, predicted = 0, actual = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool on = static_cast<double>(p[i]) > threshold;
        predicted += on;
        actual += g[i];
        tp += on && g[i];
    }
    return f_score(static_cast<double>(tp), static_cast<double>(predicted), static_cast<double>(actual), beta_sq);
}

double f_beta(const SaliencyMap &pred, const BinaryMask &gt, double beta_sq) {
    require_same_dims(pred, gt, "f_beta");
    const auto &thresholds = fbeta_thresholds();
    // hist[c]: pixels exceeding exactly the first c thresholds
    std::array<std::size_t, kFBetaThresholds + 1> fg_hist{}, bg_hist{};
    const auto p = pred.plane().values();
    const auto g = gt.plane().values();
    std::size_t actual = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto c = static_cast<std::size_t>(
            std::lower_bound(thresholds.begin(), thresholds.end(), static_cast<double>(p[i])) - thresholds.begin());
        (g[i] ? fg_hist : bg_hist)[c] += 1;
        actual += g[i];
    }
    double best = 0.0;
    std::size_t tp = 0, fp = 0;
    // walk thresholds from the highest down so counts accumulate
    for (int k = kFBetaThresholds - 1; k >= 0; --k) {
        tp += fg_hist[static_cast<std::size_t>(k) + 1];
        fp += bg_hist[static_cast<std::size_t>(k) + 1];
        best = std::max(best, f_score(static_cast<double>(tp), static_cast<double>(tp + fp),
                                      static_cast<double>(actual), beta_sq));
    }
    return best;
}

BinaryMask baseline_segment(const MotionField &flow) {
    const auto u = flow.u().values();
    const auto v = flow.v().values();
    const std::size_t n = u.size();
    std::vector<double> radius(n);
    for (std::size_t i = 0; i < n; ++i) {
        radius[i] = std::sqrt(static_cast<double>(u[i]) * u[i] + static_cast<double>(v[i]) * v[i]);
    }

    std::vector<double> sorted = radius;
    std::sort(sorted.begin(), sorted.end());
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);

    // Otsu: maximize w0 * w1 * (mu0 - mu1)^2 over splits between distinct values
    double best_score = -1.0;
    double split = 0.0;
    bool found = false;
    double below = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        below += sorted[i];
        if (sorted[i] == sorted[i + 1]) continue;
        const double n0 = static_cast<double>(i + 1);
        const double n1 = static_cast<double>(n) - n0;
        const double mu0 = below / n0;
        const double mu1 = (total - below) / n1;
        const double score = n0 * n1 * (mu0 - mu1) * (mu0 - mu1);
        if (score > best_score) {
            best_score = score;
            split = sorted[i];
            found = true;
        }
    }

    Plane<std::uint8_t> bits(flow.width(), flow.height(), 0);
    if (found) {
        auto out = bits.values();
        for (std::size_t i = 0; i < n; ++i) out[i] = radius[i] > split ? 1 : 0;
    }
    return BinaryMask(std::move(bits));
}

SaliencyMap to_saliency(const BinaryMask &mask) {
    Plane<float> values(mask.width(), mask.height());
    const auto src = mask.plane().values();
    auto dst = values.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 1.0f : 0.0f;
    return SaliencyMap(std::move(values));
}

} // namespace flowsynth
