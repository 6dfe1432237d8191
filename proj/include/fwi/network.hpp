#ifndef FWI_NETWORK_HPP
#define FWI_NETWORK_HPP

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "fwi/field.hpp"

namespace fwi {

/// Channels-first dense tensor with 2 or 3 spatial axes.
struct Tensor {
    std::vector<std::size_t> shape;   // [C, s0, s1(, s2)]
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s);
    std::size_t numel() const;
    std::size_t channels() const { return shape[0]; }
    std::size_t spatial_rank() const { return shape.size() - 1; }
    std::size_t spatial_size() const;
};

/// Nearest-neighbor x2 upsampling of every spatial axis and its adjoint
/// (summing each 2x2(x2) block).
Tensor upsample_nearest2(const Tensor& in);
Tensor upsample_nearest2_adjoint(const Tensor& g_out, const std::vector<std::size_t>& in_shape);

/// 3^d convolution with zero padding 1 (shape preserving) or 0 (valid).
/// Weights are [out_ch][in_ch][3^d] row-major, followed by out_ch biases in
/// the parameter slice convention used by GeneratorNetwork.
Tensor conv3_forward(const Tensor& in, const double* w, const double* b, std::size_t out_ch,
                     int pad);
/// Scatters the output cotangent onto weight/bias gradients and returns the
/// input cotangent.
Tensor conv3_backward(const Tensor& in, const Tensor& g_out, const double* w, double* g_w,
                      double* g_b, std::size_t out_ch, int pad);

/// Central crop of a single-channel tensor to `dims` (row-major values) and
/// its zero-padding adjoint.
std::vector<double> crop_center(const Tensor& t, const std::vector<std::size_t>& dims);
Tensor crop_center_adjoint(const std::vector<double>& g, const std::vector<std::size_t>& dims,
                           const std::vector<std::size_t>& full_dims);

/// Upsampling generator: repeated [nearest-neighbor x2 upsample, two padded
/// 3^d convolutions with PReLU] blocks, a final padding-free convolution to
/// one channel with an adaptive sigmoid, rescaling to [eps, 1], and a central
/// crop to the grid shape. Pixel-wise feature normalization after each PReLU
/// is optional and parameter-free.
struct GeneratorConfig {
    std::vector<std::size_t> latent_shape;                       // [C, s...]
    std::vector<std::pair<std::size_t, std::size_t>> blocks;     // conv channels per block
    std::vector<std::size_t> output_dims;                        // grid dims to crop to
    double eps = 1e-5;
    bool pixel_norm = false;

    void validate() const;
    std::vector<std::size_t> pre_crop_dims() const;   // latent * 2^blocks - 2
};

/// The full-scale reference architectures.
GeneratorConfig reference_2d_generator();   // 526,252 parameters, output 252 x 124
GeneratorConfig reference_3d_generator();   // 6,306,764 parameters, output 92^3

class GeneratorNetwork {
  public:
    struct Cache {
        std::vector<Tensor> acts;   // acts[i] = input of layer i; back() = sigmoid output
    };

    /// Glorot-initialized network: conv weights ~ U(+-sqrt(6/(fan_in+fan_out))),
    /// biases 0, PReLU slopes 0.25, sigmoid slope 1; latent ~ N(0,1), sampled
    /// once from latent_seed and never trained. Deterministic per seed pair.
    static GeneratorNetwork glorot_init(const GeneratorConfig& cfg, std::uint64_t param_seed,
                                        std::uint64_t latent_seed);

    const GeneratorConfig& config() const { return cfg_; }
    const Tensor& latent() const { return latent_; }
    std::size_t parameter_count() const { return params_.size(); }
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }

    /// Runs the block schedule; output node values lie strictly inside
    /// (eps, 1). Throws on non-finite parameters or activations. The cache,
    /// when requested, retains what the backward pass needs.
    ScalarField forward(const Grid& grid, Cache* cache) const;

    /// Exact reverse-mode gradient of <upstream, gamma(theta)> w.r.t. every
    /// parameter. The crop adjoint zero-pads; the upsample adjoint sums each
    /// 2x2(x2) block.
    std::vector<double> backward(const Cache& cache, const ScalarField& upstream) const;

  private:
    enum class Kind { Upsample, Conv, PRelu, PixelNorm, Sigmoid };
    struct Layer {
        Kind kind;
        std::size_t in_ch = 0, out_ch = 0;
        int pad = 1;                      // conv only
        std::size_t offset = 0, count = 0;   // slice of params_
    };

    explicit GeneratorNetwork(const GeneratorConfig& cfg);
    void build_layers();

    GeneratorConfig cfg_;
    Tensor latent_;
    std::vector<Layer> layers_;
    std::vector<double> params_;
};

}  // namespace fwi

#endif
