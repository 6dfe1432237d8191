#include "fwi/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fwi {

namespace {

// Deterministic draws independent of libstdc++ distribution internals.
struct Rng {
    std::mt19937_64 gen;
    bool have_spare = false;
    double spare = 0.0;

    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }  // [0,1)

    double normal() {   // Box-Muller
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare = r * std::sin(a);
        have_spare = true;
        return r * std::cos(a);
    }
};

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw DivergenceError(std::string("network: non-finite ") + what);
}

std::size_t pow3(std::size_t rank) { return rank == 2 ? 9 : 27; }

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(numel(), 0.0);
}

std::size_t Tensor::numel() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::size_t Tensor::spatial_size() const {
    std::size_t n = 1;
    for (std::size_t d = 1; d < shape.size(); ++d) n *= shape[d];
    return n;
}

void GeneratorConfig::validate() const {
    if (latent_shape.size() != 3 && latent_shape.size() != 4)
        throw std::invalid_argument("network: latent must be channels + 2 or 3 spatial axes");
    for (std::size_t d : latent_shape)
        if (d == 0) throw std::invalid_argument("network: latent axes must be positive");
    if (blocks.empty()) throw std::invalid_argument("network: at least one block required");
    for (const auto& [c1, c2] : blocks)
        if (c1 == 0 || c2 == 0) throw std::invalid_argument("network: block channels must be positive");
    if (output_dims.size() != latent_shape.size() - 1)
        throw std::invalid_argument("network: output rank must match the latent spatial rank");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("network: eps must lie in (0, 1)");
    const auto pre = pre_crop_dims();
    for (std::size_t d = 0; d < output_dims.size(); ++d)
        if (pre[d] < output_dims[d])
            throw std::invalid_argument("network: upsampled output smaller than the grid");
}

std::vector<std::size_t> GeneratorConfig::pre_crop_dims() const {
    std::vector<std::size_t> dims(latent_shape.begin() + 1, latent_shape.end());
    for (auto& d : dims) {
        for (std::size_t b = 0; b < blocks.size(); ++b) d *= 2;
        d -= 2;   // final padding-free convolution
    }
    return dims;
}

GeneratorConfig reference_2d_generator() {
    GeneratorConfig cfg;
    cfg.latent_shape = {128, 8, 4};
    cfg.blocks = {{128, 128}, {64, 64}, {64, 64}, {32, 32}, {32, 32}};
    cfg.output_dims = {252, 124};
    cfg.eps = 1e-5;
    cfg.pixel_norm = false;
    return cfg;
}

GeneratorConfig reference_3d_generator() {
    GeneratorConfig cfg;
    cfg.latent_shape = {256, 3, 3, 3};
    cfg.blocks = {{256, 256}, {128, 128}, {128, 128}, {64, 64}, {64, 64}};
    cfg.output_dims = {92, 92, 92};
    cfg.eps = 1e-5;
    cfg.pixel_norm = true;
    return cfg;
}

GeneratorNetwork::GeneratorNetwork(const GeneratorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    latent_ = Tensor(cfg_.latent_shape);
    build_layers();
}

void GeneratorNetwork::build_layers() {
    const std::size_t rank = cfg_.latent_shape.size() - 1;
    const std::size_t k = pow3(rank);
    std::size_t ch = cfg_.latent_shape[0];
    std::size_t offset = 0;

    auto push_conv = [&](std::size_t in_ch, std::size_t out_ch, int pad) {
        Layer l{Kind::Conv, in_ch, out_ch, pad, offset, out_ch * in_ch * k + out_ch};
        offset += l.count;
        layers_.push_back(l);
    };
    auto push_scalar = [&](Kind kind) {
        layers_.push_back(Layer{kind, 0, 0, 0, offset, 1});
        offset += 1;
    };

    for (const auto& [c1, c2] : cfg_.blocks) {
        layers_.push_back(Layer{Kind::Upsample, 0, 0, 0, offset, 0});
        push_conv(ch, c1, 1);
        push_scalar(Kind::PRelu);
        if (cfg_.pixel_norm) layers_.push_back(Layer{Kind::PixelNorm, 0, 0, 0, offset, 0});
        push_conv(c1, c2, 1);
        push_scalar(Kind::PRelu);
        if (cfg_.pixel_norm) layers_.push_back(Layer{Kind::PixelNorm, 0, 0, 0, offset, 0});
        ch = c2;
    }
    push_conv(ch, 1, 0);
    push_scalar(Kind::Sigmoid);
    params_.assign(offset, 0.0);
}

GeneratorNetwork GeneratorNetwork::glorot_init(const GeneratorConfig& cfg,
                                               std::uint64_t param_seed,
                                               std::uint64_t latent_seed) {
    GeneratorNetwork net(cfg);
    const std::size_t rank = cfg.latent_shape.size() - 1;
    const std::size_t k = pow3(rank);

    Rng prng(param_seed);
    for (const Layer& l : net.layers_) {
        double* p = net.params_.data() + l.offset;
        switch (l.kind) {
            case Kind::Conv: {
                const double fan_in = static_cast<double>(l.in_ch * k);
                const double fan_out = static_cast<double>(l.out_ch * k);
                const double bound = std::sqrt(6.0 / (fan_in + fan_out));
                const std::size_t n_w = l.out_ch * l.in_ch * k;
                for (std::size_t i = 0; i < n_w; ++i)
                    p[i] = bound * (2.0 * prng.uniform() - 1.0);
                for (std::size_t i = 0; i < l.out_ch; ++i) p[n_w + i] = 0.0;
                break;
            }
            case Kind::PRelu:
                p[0] = 0.25;
                break;
            case Kind::Sigmoid:
                p[0] = 1.0;
                break;
            default:
                break;
        }
    }

    Rng lrng(latent_seed);
    for (double& v : net.latent_.data) v = lrng.normal();
    return net;
}

Tensor upsample_nearest2(const Tensor& in) {
    const std::size_t rank = in.spatial_rank();
    std::vector<std::size_t> os = in.shape;
    for (std::size_t d = 1; d < os.size(); ++d) os[d] *= 2;
    Tensor out(os);
    if (rank == 2) {
        const std::size_t c = in.shape[0], h = in.shape[1], w = in.shape[2];
        for (std::size_t ic = 0; ic < c; ++ic)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    const double v = in.data[(ic * h + y) * w + x];
                    double* o = out.data.data() + (ic * 2 * h + 2 * y) * 2 * w + 2 * x;
                    o[0] = v;
                    o[1] = v;
                    o[2 * w] = v;
                    o[2 * w + 1] = v;
                }
    } else {
        const std::size_t c = in.shape[0], d0 = in.shape[1], d1 = in.shape[2], d2 = in.shape[3];
        for (std::size_t ic = 0; ic < c; ++ic)
            for (std::size_t z = 0; z < d0; ++z)
                for (std::size_t y = 0; y < d1; ++y)
                    for (std::size_t x = 0; x < d2; ++x) {
                        const double v = in.data[((ic * d0 + z) * d1 + y) * d2 + x];
                        for (std::size_t az = 0; az < 2; ++az)
                            for (std::size_t ay = 0; ay < 2; ++ay)
                                for (std::size_t ax = 0; ax < 2; ++ax)
                                    out.data[((ic * 2 * d0 + 2 * z + az) * 2 * d1 + 2 * y + ay) *
                                                 2 * d2 +
                                             2 * x + ax] = v;
                    }
    }
    return out;
}

Tensor upsample_nearest2_adjoint(const Tensor& g_out, const std::vector<std::size_t>& in_shape) {
    Tensor g_in(in_shape);
    const std::size_t rank = g_in.spatial_rank();
    if (rank == 2) {
        const std::size_t c = in_shape[0], h = in_shape[1], w = in_shape[2];
        for (std::size_t ic = 0; ic < c; ++ic)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    const double* g = g_out.data.data() + (ic * 2 * h + 2 * y) * 2 * w + 2 * x;
                    g_in.data[(ic * h + y) * w + x] = g[0] + g[1] + g[2 * w] + g[2 * w + 1];
                }
    } else {
        const std::size_t c = in_shape[0], d0 = in_shape[1], d1 = in_shape[2], d2 = in_shape[3];
        for (std::size_t ic = 0; ic < c; ++ic)
            for (std::size_t z = 0; z < d0; ++z)
                for (std::size_t y = 0; y < d1; ++y)
                    for (std::size_t x = 0; x < d2; ++x) {
                        double s = 0.0;
                        for (std::size_t az = 0; az < 2; ++az)
                            for (std::size_t ay = 0; ay < 2; ++ay)
                                for (std::size_t ax = 0; ax < 2; ++ax)
                                    s += g_out.data[((ic * 2 * d0 + 2 * z + az) * 2 * d1 + 2 * y +
                                                     ay) *
                                                        2 * d2 +
                                                    2 * x + ax];
                        g_in.data[((ic * d0 + z) * d1 + y) * d2 + x] = s;
                    }
    }
    return g_in;
}

Tensor conv3_forward(const Tensor& in, const double* w, const double* b, std::size_t out_ch,
                     int pad) {
    const std::size_t rank = in.spatial_rank();
    std::vector<std::size_t> os{out_ch};
    for (std::size_t d = 1; d < in.shape.size(); ++d) os.push_back(in.shape[d] + 2 * pad - 2);
    Tensor out(os);
    const std::size_t in_ch = in.shape[0];

    if (rank == 2) {
        const std::size_t ih = in.shape[1], iw = in.shape[2];
        const std::size_t oh = os[1], ow = os[2];
        for (std::size_t oc = 0; oc < out_ch; ++oc)
            for (std::size_t y = 0; y < oh; ++y)
                for (std::size_t x = 0; x < ow; ++x) {
                    double acc = b[oc];
                    for (std::size_t ic = 0; ic < in_ch; ++ic) {
                        const double* wk = w + (oc * in_ch + ic) * 9;
                        for (std::size_t ky = 0; ky < 3; ++ky) {
                            const long sy = static_cast<long>(y + ky) - pad;
                            if (sy < 0 || sy >= static_cast<long>(ih)) continue;
                            for (std::size_t kx = 0; kx < 3; ++kx) {
                                const long sx = static_cast<long>(x + kx) - pad;
                                if (sx < 0 || sx >= static_cast<long>(iw)) continue;
                                acc += wk[ky * 3 + kx] * in.data[(ic * ih + sy) * iw + sx];
                            }
                        }
                    }
                    out.data[(oc * oh + y) * ow + x] = acc;
                }
    } else {
        const std::size_t i0 = in.shape[1], i1 = in.shape[2], i2 = in.shape[3];
        const std::size_t o0 = os[1], o1 = os[2], o2 = os[3];
        for (std::size_t oc = 0; oc < out_ch; ++oc)
            for (std::size_t z = 0; z < o0; ++z)
                for (std::size_t y = 0; y < o1; ++y)
                    for (std::size_t x = 0; x < o2; ++x) {
                        double acc = b[oc];
                        for (std::size_t ic = 0; ic < in_ch; ++ic) {
                            const double* wk = w + (oc * in_ch + ic) * 27;
                            for (std::size_t kz = 0; kz < 3; ++kz) {
                                const long sz = static_cast<long>(z + kz) - pad;
                                if (sz < 0 || sz >= static_cast<long>(i0)) continue;
                                for (std::size_t ky = 0; ky < 3; ++ky) {
                                    const long sy = static_cast<long>(y + ky) - pad;
                                    if (sy < 0 || sy >= static_cast<long>(i1)) continue;
                                    for (std::size_t kx = 0; kx < 3; ++kx) {
                                        const long sx = static_cast<long>(x + kx) - pad;
                                        if (sx < 0 || sx >= static_cast<long>(i2)) continue;
                                        acc += wk[(kz * 3 + ky) * 3 + kx] *
                                               in.data[((ic * i0 + sz) * i1 + sy) * i2 + sx];
                                    }
                                }
                            }
                        }
                        out.data[((oc * o0 + z) * o1 + y) * o2 + x] = acc;
                    }
    }
    return out;
}

Tensor conv3_backward(const Tensor& in, const Tensor& g_out, const double* w, double* g_w,
                      double* g_b, std::size_t out_ch, int pad) {
    const std::size_t rank = in.spatial_rank();
    Tensor g_in(in.shape);
    const std::size_t in_ch = in.shape[0];

    if (rank == 2) {
        const std::size_t ih = in.shape[1], iw = in.shape[2];
        const std::size_t oh = g_out.shape[1], ow = g_out.shape[2];
        for (std::size_t oc = 0; oc < out_ch; ++oc)
            for (std::size_t y = 0; y < oh; ++y)
                for (std::size_t x = 0; x < ow; ++x) {
                    const double g = g_out.data[(oc * oh + y) * ow + x];
                    if (g == 0.0) continue;
                    g_b[oc] += g;
                    for (std::size_t ic = 0; ic < in_ch; ++ic) {
                        const double* wk = w + (oc * in_ch + ic) * 9;
                        double* gk = g_w + (oc * in_ch + ic) * 9;
                        for (std::size_t ky = 0; ky < 3; ++ky) {
                            const long sy = static_cast<long>(y + ky) - pad;
                            if (sy < 0 || sy >= static_cast<long>(ih)) continue;
                            for (std::size_t kx = 0; kx < 3; ++kx) {
                                const long sx = static_cast<long>(x + kx) - pad;
                                if (sx < 0 || sx >= static_cast<long>(iw)) continue;
                                const std::size_t si = (ic * ih + sy) * iw + sx;
                                gk[ky * 3 + kx] += g * in.data[si];
                                g_in.data[si] += g * wk[ky * 3 + kx];
                            }
                        }
                    }
                }
    } else {
        const std::size_t i0 = in.shape[1], i1 = in.shape[2], i2 = in.shape[3];
        const std::size_t o0 = g_out.shape[1], o1 = g_out.shape[2], o2 = g_out.shape[3];
        for (std::size_t oc = 0; oc < out_ch; ++oc)
            for (std::size_t z = 0; z < o0; ++z)
                for (std::size_t y = 0; y < o1; ++y)
                    for (std::size_t x = 0; x < o2; ++x) {
                        const double g = g_out.data[((oc * o0 + z) * o1 + y) * o2 + x];
                        if (g == 0.0) continue;
                        g_b[oc] += g;
                        for (std::size_t ic = 0; ic < in_ch; ++ic) {
                            const double* wk = w + (oc * in_ch + ic) * 27;
                            double* gk = g_w + (oc * in_ch + ic) * 27;
                            for (std::size_t kz = 0; kz < 3; ++kz) {
                                const long sz = static_cast<long>(z + kz) - pad;
                                if (sz < 0 || sz >= static_cast<long>(i0)) continue;
                                for (std::size_t ky = 0; ky < 3; ++ky) {
                                    const long sy = static_cast<long>(y + ky) - pad;
                                    if (sy < 0 || sy >= static_cast<long>(i1)) continue;
                                    for (std::size_t kx = 0; kx < 3; ++kx) {
                                        const long sx = static_cast<long>(x + kx) - pad;
                                        if (sx < 0 || sx >= static_cast<long>(i2)) continue;
                                        const std::size_t si =
                                            ((ic * i0 + sz) * i1 + sy) * i2 + sx;
                                        gk[(kz * 3 + ky) * 3 + kx] += g * in.data[si];
                                        g_in.data[si] += g * wk[(kz * 3 + ky) * 3 + kx];
                                    }
                                }
                            }
                        }
                    }
    }
    return g_in;
}

std::vector<double> crop_center(const Tensor& t, const std::vector<std::size_t>& dims) {
    const std::size_t rank = t.spatial_rank();
    if (t.shape[0] != 1 || dims.size() != rank)
        throw std::invalid_argument("crop: expects a single-channel tensor of matching rank");
    std::vector<std::size_t> off(rank), tstr(rank, 1), ostr(rank, 1);
    std::size_t n = 1;
    for (std::size_t d = 0; d < rank; ++d) {
        if (t.shape[d + 1] < dims[d]) throw std::invalid_argument("crop: target larger than input");
        off[d] = (t.shape[d + 1] - dims[d]) / 2;
        n *= dims[d];
    }
    for (std::size_t d = rank; d-- > 1;) {
        tstr[d - 1] = tstr[d] * t.shape[d + 1];
        ostr[d - 1] = ostr[d] * dims[d];
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ti = 0;
        for (std::size_t d = 0; d < rank; ++d) ti += ((i / ostr[d]) % dims[d] + off[d]) * tstr[d];
        out[i] = t.data[ti];
    }
    return out;
}

Tensor crop_center_adjoint(const std::vector<double>& g, const std::vector<std::size_t>& dims,
                           const std::vector<std::size_t>& full_dims) {
    const std::size_t rank = dims.size();
    std::vector<std::size_t> shape{1};
    for (std::size_t d : full_dims) shape.push_back(d);
    Tensor out(shape);
    std::vector<std::size_t> off(rank), tstr(rank, 1), ostr(rank, 1);
    for (std::size_t d = 0; d < rank; ++d) off[d] = (full_dims[d] - dims[d]) / 2;
    for (std::size_t d = rank; d-- > 1;) {
        tstr[d - 1] = tstr[d] * full_dims[d];
        ostr[d - 1] = ostr[d] * dims[d];
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::size_t ti = 0;
        for (std::size_t d = 0; d < rank; ++d) ti += ((i / ostr[d]) % dims[d] + off[d]) * tstr[d];
        out.data[ti] = g[i];
    }
    return out;
}

namespace {
constexpr double kPixelNormEps = 1e-8;
}  // namespace

ScalarField GeneratorNetwork::forward(const Grid& grid, Cache* cache) const {
    if (grid.dims != cfg_.output_dims)
        throw std::invalid_argument("network: grid does not match the configured output shape");
    check_finite(params_, "parameter");

    Tensor t = latent_;
    if (cache) {
        cache->acts.clear();
        cache->acts.reserve(layers_.size() + 1);
        cache->acts.push_back(t);
    }

    for (const Layer& l : layers_) {
        switch (l.kind) {
            case Kind::Upsample:
                t = upsample_nearest2(t);
                break;
            case Kind::Conv: {
                const double* w = params_.data() + l.offset;
                const double* b = w + l.out_ch * l.in_ch * pow3(t.spatial_rank());
                t = conv3_forward(t, w, b, l.out_ch, l.pad);
                break;
            }
            case Kind::PRelu: {
                const double a = params_[l.offset];
                for (double& v : t.data) v = v > 0.0 ? v : a * v;
                break;
            }
            case Kind::PixelNorm: {
                const std::size_t c = t.channels(), sp = t.spatial_size();
                for (std::size_t p = 0; p < sp; ++p) {
                    double m = 0.0;
                    for (std::size_t ic = 0; ic < c; ++ic) {
                        const double v = t.data[ic * sp + p];
                        m += v * v;
                    }
                    const double inv = 1.0 / std::sqrt(m / static_cast<double>(c) + kPixelNormEps);
                    for (std::size_t ic = 0; ic < c; ++ic) t.data[ic * sp + p] *= inv;
                }
                break;
            }
            case Kind::Sigmoid: {
                const double a = params_[l.offset];
                for (double& v : t.data) v = 1.0 / (1.0 + std::exp(-a * v));
                break;
            }
        }
        check_finite(t.data, "activation");
        if (cache) cache->acts.push_back(t);
    }

    // rescale to [eps, 1] and crop centrally to the grid
    ScalarField gamma(grid);
    gamma.values = crop_center(t, grid.dims);
    const double eps = cfg_.eps;
    for (double& v : gamma.values) {
        v = eps + (1.0 - eps) * v;
        v = std::min(1.0, std::max(eps, v));   // safety clamp, never binds
    }
    return gamma;
}

std::vector<double> GeneratorNetwork::backward(const Cache& cache,
                                               const ScalarField& upstream) const {
    if (cache.acts.size() != layers_.size() + 1)
        throw std::invalid_argument("network: cache does not match this architecture");
    if (upstream.grid.dims != cfg_.output_dims)
        throw std::invalid_argument("network: upstream grid mismatch");

    std::vector<double> grad(params_.size(), 0.0);

    // crop adjoint zero-pads; rescale adjoint scales by (1 - eps)
    std::vector<double> scaled = upstream.values;
    for (double& v : scaled) v *= 1.0 - cfg_.eps;
    Tensor g = crop_center_adjoint(scaled, upstream.grid.dims, cfg_.pre_crop_dims());

    for (std::size_t li = layers_.size(); li-- > 0;) {
        const Layer& l = layers_[li];
        const Tensor& in = cache.acts[li];
        switch (l.kind) {
            case Kind::Upsample:
                g = upsample_nearest2_adjoint(g, in.shape);
                break;
            case Kind::Conv: {
                const double* w = params_.data() + l.offset;
                double* g_w = grad.data() + l.offset;
                double* g_b = g_w + l.out_ch * l.in_ch * pow3(in.spatial_rank());
                g = conv3_backward(in, g, w, g_w, g_b, l.out_ch, l.pad);
                break;
            }
            case Kind::PRelu: {
                const double a = params_[l.offset];
                double ga = 0.0;
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    const double x = in.data[i];
                    if (x <= 0.0) {
                        ga += g.data[i] * x;
                        g.data[i] *= a;
                    }
                }
                grad[l.offset] += ga;
                break;
            }
            case Kind::PixelNorm: {
                const std::size_t c = in.channels(), sp = in.spatial_size();
                for (std::size_t p = 0; p < sp; ++p) {
                    double m = 0.0, gx = 0.0;
                    for (std::size_t ic = 0; ic < c; ++ic) {
                        const double v = in.data[ic * sp + p];
                        m += v * v;
                        gx += g.data[ic * sp + p] * v;
                    }
                    const double mc = m / static_cast<double>(c) + kPixelNormEps;
                    const double inv = 1.0 / std::sqrt(mc);
                    const double inv3 = inv / mc;
                    for (std::size_t ic = 0; ic < c; ++ic) {
                        const std::size_t idx = ic * sp + p;
                        g.data[idx] =
                            inv * g.data[idx] - in.data[idx] * inv3 * gx / static_cast<double>(c);
                    }
                }
                break;
            }
            case Kind::Sigmoid: {
                const double a = params_[l.offset];
                double ga = 0.0;
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    const double x = in.data[i];
                    const double s = 1.0 / (1.0 + std::exp(-a * x));
                    const double ds = s * (1.0 - s);
                    ga += g.data[i] * x * ds;
                    g.data[i] *= a * ds;
                }
                grad[l.offset] += ga;
                break;
            }
        }
    }
    return grad;
}

}  // namespace fwi
