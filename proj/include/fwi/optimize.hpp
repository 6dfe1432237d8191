#ifndef FWI_OPTIMIZE_HPP
#define FWI_OPTIMIZE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fwi {

enum class Strategy { AdjointConstant, BackpropNN, Hybrid, FullDomainPinn };

Strategy strategy_from_name(const std::string& name);
std::string strategy_name(Strategy s);

/// Optimization settings shared by all drivers. The learning rate follows the
/// polynomial decay lr * (b * epoch + 1)^a; lr_max drives the penalty-weight
/// ascent of the collocation inversion only.
struct TrainConfig {
    Strategy strategy = Strategy::AdjointConstant;
    std::size_t epochs = 50;
    double lr = 6e-2;
    double lr_max = 2e-2;
    double decay_a = -0.5;
    double decay_b = 0.2;
    double clip_threshold = 1.0;
    std::uint64_t seed = 42;
    bool trapezoid_loss = false;
    std::vector<std::size_t> voxel_nodes;   // constant-ansatz voxel layout; empty = per node

    void validate() const;
};

/// lr * (b * epoch + 1)^a; non-increasing for a <= 0, b >= 0.
double lr_schedule(std::size_t epoch, const TrainConfig& cfg);

/// Global L2-norm clipping: vectors longer than the threshold are rescaled
/// onto the threshold sphere, directions preserved.
void clip_gradient(std::vector<double>& grad, double threshold);
double l2_norm(const std::vector<double>& v);

/// Bias-corrected Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               double lr);

}  // namespace fwi

#endif
