#include "spstgcn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace spstgcn {

namespace {

inline void axpy(double* __restrict y, const double* __restrict x, std::size_t n, double a) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// Four independent partial sums so the reduction can vectorize; the
// summation order is fixed, so results stay deterministic run to run.
inline double dot(const double* __restrict a, const double* __restrict b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((s0 + s1) + (s2 + s3)) + tail;
}

void require_activation(const Tensor& x, const char* op) {
    if (x.rank() != 5) {
        throw ShapeMismatch(std::string(op) + ": expected (N,C,T,V,M), got " + x.shape_string());
    }
}

// out_n[c', t, v, m] += sum_u p_n[c', t, u, m] * S[u, v]
// p and out are (C, T, V, M) slices of one sample; S is V x V row-major.
void contract_adjacency(const double* p, double* out, std::size_t c_len, std::size_t t_len,
                        std::size_t v, std::size_t m_len, const double* s) {
    if (m_len == 1) {
        // single body slot: rows are contiguous
        for (std::size_t ct = 0; ct < c_len * t_len; ++ct) {
            const double* pm = p + ct * v;
            double* om = out + ct * v;
            for (std::size_t u = 0; u < v; ++u) {
                if (pm[u] != 0.0) axpy(om, s + u * v, v, pm[u]);
            }
        }
        return;
    }
    std::vector<double> pu(v), acc(v);
    for (std::size_t c = 0; c < c_len; ++c) {
        for (std::size_t t = 0; t < t_len; ++t) {
            const std::size_t base = (c * t_len + t) * v * m_len;
            for (std::size_t m = 0; m < m_len; ++m) {
                const double* pm = p + base + m;
                double* om = out + base + m;
                for (std::size_t u = 0; u < v; ++u) pu[u] = pm[u * m_len];
                std::fill(acc.begin(), acc.end(), 0.0);
                for (std::size_t u = 0; u < v; ++u) {
                    if (pu[u] != 0.0) axpy(acc.data(), s + u * v, v, pu[u]);
                }
                for (std::size_t vv = 0; vv < v; ++vv) om[vv * m_len] += acc[vv];
            }
        }
    }
}

// gp_n[c', t, u, m] = sum_v gout_n[c', t, v, m] * S[u, v]  (contract with S^T)
void contract_adjacency_t(const double* gout, double* gp, std::size_t c_len, std::size_t t_len,
                          std::size_t v, std::size_t m_len, const double* s) {
    if (m_len == 1) {
        // transpose once so the inner loop is an axpy over contiguous rows
        std::vector<double> st(v * v);
        for (std::size_t u = 0; u < v; ++u) {
            for (std::size_t vv = 0; vv < v; ++vv) st[vv * v + u] = s[u * v + vv];
        }
        for (std::size_t ct = 0; ct < c_len * t_len; ++ct) {
            const double* gm = gout + ct * v;
            double* pm = gp + ct * v;
            std::fill(pm, pm + v, 0.0);
            for (std::size_t vv = 0; vv < v; ++vv) {
                if (gm[vv] != 0.0) axpy(pm, st.data() + vv * v, v, gm[vv]);
            }
        }
        return;
    }
    std::vector<double> gv(v);
    for (std::size_t c = 0; c < c_len; ++c) {
        for (std::size_t t = 0; t < t_len; ++t) {
            const std::size_t base = (c * t_len + t) * v * m_len;
            for (std::size_t m = 0; m < m_len; ++m) {
                const double* gm = gout + base + m;
                double* pm = gp + base + m;
                for (std::size_t vv = 0; vv < v; ++vv) gv[vv] = gm[vv * m_len];
                for (std::size_t u = 0; u < v; ++u) {
                    pm[u * m_len] = dot(s + u * v, gv.data(), v);
                }
            }
        }
    }
}

// gs[u, v] += sum_{c,t,m} p_n[c, t, u, m] * gout_n[c, t, v, m]
void accumulate_adjacency_grad(const double* p, const double* gout, std::size_t c_len,
                               std::size_t t_len, std::size_t v, std::size_t m_len, double* gs) {
    if (m_len == 1) {
        for (std::size_t ct = 0; ct < c_len * t_len; ++ct) {
            const double* pm = p + ct * v;
            const double* gm = gout + ct * v;
            for (std::size_t u = 0; u < v; ++u) {
                if (pm[u] != 0.0) axpy(gs + u * v, gm, v, pm[u]);
            }
        }
        return;
    }
    std::vector<double> pu(v), gv(v);
    for (std::size_t c = 0; c < c_len; ++c) {
        for (std::size_t t = 0; t < t_len; ++t) {
            const std::size_t base = (c * t_len + t) * v * m_len;
            for (std::size_t m = 0; m < m_len; ++m) {
                const double* pm = p + base + m;
                const double* gm = gout + base + m;
                for (std::size_t u = 0; u < v; ++u) pu[u] = pm[u * m_len];
                for (std::size_t vv = 0; vv < v; ++vv) gv[vv] = gm[vv * m_len];
                for (std::size_t u = 0; u < v; ++u) {
                    if (pu[u] != 0.0) axpy(gs + u * v, gv.data(), v, pu[u]);
                }
            }
        }
    }
}

// y_n = W x_n over the flattened (C, plane) view of one sample.
void channel_mix(const double* x, double* y, std::size_t c_in, std::size_t c_out,
                 std::size_t plane, const double* w) {
    for (std::size_t co = 0; co < c_out; ++co) {
        double* row = y + co * plane;
        std::fill(row, row + plane, 0.0);
        const double* wrow = w + co * c_in;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            if (wrow[ci] != 0.0) axpy(row, x + ci * plane, plane, wrow[ci]);
        }
    }
}

} // namespace

void init_uniform_fan_in(Tensor& t, std::size_t fan_in, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
}

// ---------------------------------------------------------------------------
// SpStGcnLayer
// ---------------------------------------------------------------------------

SpStGcnLayer::SpStGcnLayer(std::size_t c_in, std::size_t c_out, SpatialAdjacency adj,
                           bool structural, std::string name_prefix)
    : c_in_(c_in), c_out_(c_out), adj_(std::move(adj)), structural_(structural) {
    const std::size_t v = adj_.joints();
    for (std::size_t j = 0; j < adj_.partitions(); ++j) {
        w_.emplace_back(std::vector<std::size_t>{c_out, c_in}, TensorRole::parameter,
                        name_prefix + ".w" + std::to_string(j));
        // B_j starts as exact zeros and is learned.
        b_.emplace_back(std::vector<std::size_t>{v, v}, TensorRole::parameter,
                        name_prefix + ".b" + std::to_string(j));
    }
    if (structural_) {
        m1_ = DiffTensor({c_out, c_in}, TensorRole::parameter, name_prefix + ".m1");
    }
}

void SpStGcnLayer::init_params(std::mt19937_64& rng) {
    for (DiffTensor& w : w_) init_uniform_fan_in(w.value, c_in_, rng);
    if (structural_) init_uniform_fan_in(m1_.value, c_in_, rng);
    // b_ stays zero
}

Tensor SpStGcnLayer::forward(const Tensor& x, const Tensor& as_batch) {
    require_activation(x, "SpStGcnLayer::forward");
    const std::size_t n_len = x.dim(0), t_len = x.dim(2), v = x.dim(3), m_len = x.dim(4);
    if (x.dim(1) != c_in_ || v != adj_.joints()) {
        throw ShapeMismatch("SpStGcnLayer: input " + x.shape_string() + " incompatible with C_in=" +
                            std::to_string(c_in_) + ", V=" + std::to_string(adj_.joints()));
    }
    const bool use_structural = structural_enabled();
    if (use_structural &&
        (as_batch.rank() != 3 || as_batch.dim(0) != n_len || as_batch.dim(1) != v ||
         as_batch.dim(2) != v)) {
        throw ShapeMismatch("SpStGcnLayer: structural branch needs (N,V,V) adjacency, got " +
                            as_batch.shape_string());
    }
    x_cache_ = x;
    as_cache_ = use_structural ? as_batch : Tensor();

    const std::size_t plane = t_len * v * m_len;
    Tensor out({n_len, c_out_, t_len, v, m_len});
    std::vector<double> p(c_out_ * plane);
    Tensor s({v, v});

    for (std::size_t j = 0; j < adj_.partitions(); ++j) {
        const Tensor& ahat = adj_.normalized[j];
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = ahat[i] + b_[j].value[i];
        for (std::size_t n = 0; n < n_len; ++n) {
            const double* xn = x.data() + n * c_in_ * plane;
            double* on = out.data() + n * c_out_ * plane;
            channel_mix(xn, p.data(), c_in_, c_out_, plane, w_[j].value.data());
            contract_adjacency(p.data(), on, c_out_, t_len, v, m_len, s.data());
        }
    }
    if (use_structural) {
        for (std::size_t n = 0; n < n_len; ++n) {
            const double* xn = x.data() + n * c_in_ * plane;
            double* on = out.data() + n * c_out_ * plane;
            channel_mix(xn, p.data(), c_in_, c_out_, plane, m1_.value.data());
            contract_adjacency(p.data(), on, c_out_, t_len, v, m_len,
                               as_batch.data() + n * v * v);
        }
    }
    return out;
}

Tensor SpStGcnLayer::backward(const Tensor& gout) {
    const Tensor& x = x_cache_;
    if (x.empty()) throw Error("SpStGcnLayer::backward before forward");
    const std::size_t n_len = x.dim(0), t_len = x.dim(2), v = x.dim(3), m_len = x.dim(4);
    const std::size_t plane = t_len * v * m_len;
    if (gout.rank() != 5 || gout.dim(0) != n_len || gout.dim(1) != c_out_) {
        throw ShapeMismatch("SpStGcnLayer::backward: unexpected gradient shape " +
                            gout.shape_string());
    }

    Tensor gx({n_len, c_in_, t_len, v, m_len});
    std::vector<double> p(c_out_ * plane), gp(c_out_ * plane);
    Tensor s({v, v});

    auto run_branch = [&](const Tensor& weight, Tensor& gweight, Tensor* gmask,
                          const double* s_all, bool per_sample_s) {
        for (std::size_t n = 0; n < n_len; ++n) {
            const double* sn = per_sample_s ? s_all + n * v * v : s_all;
            const double* xn = x.data() + n * c_in_ * plane;
            const double* gn = gout.data() + n * c_out_ * plane;
            double* gxn = gx.data() + n * c_in_ * plane;

            // gP = gOut S^T
            contract_adjacency_t(gn, gp.data(), c_out_, t_len, v, m_len, sn);
            // gW += gP X^T
            for (std::size_t co = 0; co < c_out_; ++co) {
                for (std::size_t ci = 0; ci < c_in_; ++ci) {
                    gweight[co * c_in_ + ci] += dot(gp.data() + co * plane, xn + ci * plane, plane);
                }
            }
            // gX += W^T gP
            for (std::size_t co = 0; co < c_out_; ++co) {
                const double* wrow = weight.data() + co * c_in_;
                for (std::size_t ci = 0; ci < c_in_; ++ci) {
                    if (wrow[ci] != 0.0) axpy(gxn + ci * plane, gp.data() + co * plane, plane, wrow[ci]);
                }
            }
            // gS += P^T gOut (only for learned masks)
            if (gmask) {
                channel_mix(xn, p.data(), c_in_, c_out_, plane, weight.data());
                accumulate_adjacency_grad(p.data(), gn, c_out_, t_len, v, m_len, gmask->data());
            }
        }
    };

    for (std::size_t j = 0; j < adj_.partitions(); ++j) {
        const Tensor& ahat = adj_.normalized[j];
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = ahat[i] + b_[j].value[i];
        run_branch(w_[j].value, w_[j].grad, &b_[j].grad, s.data(), false);
    }
    if (structural_enabled() && !as_cache_.empty()) {
        run_branch(m1_.value, m1_.grad, nullptr, as_cache_.data(), true);
    }
    return gx;
}

Tensor SpStGcnLayer::forward_spatial(const Tensor& x) const {
    require_activation(x, "forward_spatial");
    const std::size_t n_len = x.dim(0), t_len = x.dim(2), v = x.dim(3), m_len = x.dim(4);
    const std::size_t plane = t_len * v * m_len;
    Tensor out({n_len, c_out_, t_len, v, m_len});
    std::vector<double> p(c_out_ * plane);
    Tensor s({v, v});
    for (std::size_t j = 0; j < adj_.partitions(); ++j) {
        const Tensor& ahat = adj_.normalized[j];
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = ahat[i] + b_[j].value[i];
        for (std::size_t n = 0; n < n_len; ++n) {
            channel_mix(x.data() + n * c_in_ * plane, p.data(), c_in_, c_out_, plane,
                        w_[j].value.data());
            contract_adjacency(p.data(), out.data() + n * c_out_ * plane, c_out_, t_len, v, m_len,
                               s.data());
        }
    }
    return out;
}

Tensor SpStGcnLayer::forward_structural(const Tensor& x, const Tensor& as_batch) const {
    require_activation(x, "forward_structural");
    if (!structural_) throw Error("layer has no structural branch");
    const std::size_t n_len = x.dim(0), t_len = x.dim(2), v = x.dim(3), m_len = x.dim(4);
    const std::size_t plane = t_len * v * m_len;
    Tensor out({n_len, c_out_, t_len, v, m_len});
    std::vector<double> p(c_out_ * plane);
    for (std::size_t n = 0; n < n_len; ++n) {
        channel_mix(x.data() + n * c_in_ * plane, p.data(), c_in_, c_out_, plane,
                    m1_.value.data());
        contract_adjacency(p.data(), out.data() + n * c_out_ * plane, c_out_, t_len, v, m_len,
                           as_batch.data() + n * v * v);
    }
    return out;
}

std::vector<DiffTensor*> SpStGcnLayer::params() {
    std::vector<DiffTensor*> out;
    for (DiffTensor& w : w_) out.push_back(&w);
    for (DiffTensor& b : b_) out.push_back(&b);
    if (structural_) out.push_back(&m1_);
    return out;
}

// ---------------------------------------------------------------------------
// TemporalConv
// ---------------------------------------------------------------------------

TemporalConv::TemporalConv(std::size_t c_in, std::size_t c_out, std::size_t kernel,
                           std::size_t stride, std::string name_prefix)
    : c_in_(c_in), c_out_(c_out), kernel_(kernel), stride_(stride),
      w_({c_out, c_in, kernel}, TensorRole::parameter, name_prefix + ".w"),
      bias_({c_out}, TensorRole::parameter, name_prefix + ".bias") {
    if (kernel % 2 == 0) throw Error("TemporalConv: kernel size must be odd");
    if (stride == 0) throw Error("TemporalConv: stride must be >= 1");
}

std::size_t TemporalConv::out_frames(std::size_t t_in, std::size_t kernel, std::size_t stride) {
    const std::size_t pad = (kernel - 1) / 2;
    return (t_in + 2 * pad - kernel) / stride + 1;
}

void TemporalConv::init_params(std::mt19937_64& rng) {
    init_uniform_fan_in(w_.value, c_in_ * kernel_, rng);
    // bias stays zero
}

Tensor TemporalConv::forward(const Tensor& x) {
    require_activation(x, "TemporalConv::forward");
    const std::size_t n_len = x.dim(0), t_in = x.dim(2), v = x.dim(3), m_len = x.dim(4);
    if (x.dim(1) != c_in_) {
        throw ShapeMismatch("TemporalConv: expected C_in=" + std::to_string(c_in_) + ", got " +
                            x.shape_string());
    }
    x_cache_ = x;
    const std::size_t t_out = out_frames(t_in, kernel_, stride_);
    const std::size_t span = v * m_len;
    const long pad = static_cast<long>((kernel_ - 1) / 2);

    Tensor out({n_len, c_out_, t_out, v, m_len});
    for (std::size_t n = 0; n < n_len; ++n) {
        for (std::size_t co = 0; co < c_out_; ++co) {
            double* obase = out.data() + ((n * c_out_ + co) * t_out) * span;
            const double b = bias_.value[co];
            std::fill(obase, obase + t_out * span, b);
            for (std::size_t ci = 0; ci < c_in_; ++ci) {
                const double* xbase = x.data() + ((n * c_in_ + ci) * t_in) * span;
                for (std::size_t k = 0; k < kernel_; ++k) {
                    const double wk = w_.value[(co * c_in_ + ci) * kernel_ + k];
                    if (wk == 0.0) continue;
                    for (std::size_t to = 0; to < t_out; ++to) {
                        const long ti = static_cast<long>(to * stride_ + k) - pad;
                        if (ti < 0 || ti >= static_cast<long>(t_in)) continue;
                        axpy(obase + to * span, xbase + ti * span, span, wk);
                    }
                }
            }
        }
    }
    return out;
}

Tensor TemporalConv::backward(const Tensor& gout) {
    const Tensor& x = x_cache_;
    if (x.empty()) throw Error("TemporalConv::backward before forward");
    const std::size_t n_len = x.dim(0), t_in = x.dim(2), v = x.dim(3), m_len = x.dim(4);
    const std::size_t t_out = gout.dim(2);
    const std::size_t span = v * m_len;
    const long pad = static_cast<long>((kernel_ - 1) / 2);

    Tensor gx({n_len, c_in_, t_in, v, m_len});
    for (std::size_t n = 0; n < n_len; ++n) {
        for (std::size_t co = 0; co < c_out_; ++co) {
            const double* gbase = gout.data() + ((n * c_out_ + co) * t_out) * span;
            double gb = 0.0;
            for (std::size_t i = 0; i < t_out * span; ++i) gb += gbase[i];
            bias_.grad[co] += gb;
            for (std::size_t ci = 0; ci < c_in_; ++ci) {
                const double* xbase = x.data() + ((n * c_in_ + ci) * t_in) * span;
                double* gxbase = gx.data() + ((n * c_in_ + ci) * t_in) * span;
                for (std::size_t k = 0; k < kernel_; ++k) {
                    const double wk = w_.value[(co * c_in_ + ci) * kernel_ + k];
                    double gw = 0.0;
                    for (std::size_t to = 0; to < t_out; ++to) {
                        const long ti = static_cast<long>(to * stride_ + k) - pad;
                        if (ti < 0 || ti >= static_cast<long>(t_in)) continue;
                        gw += dot(gbase + to * span, xbase + ti * span, span);
                        if (wk != 0.0) axpy(gxbase + ti * span, gbase + to * span, span, wk);
                    }
                    w_.grad[(co * c_in_ + ci) * kernel_ + k] += gw;
                }
            }
        }
    }
    return gx;
}

std::vector<DiffTensor*> TemporalConv::params() { return {&w_, &bias_}; }

// ---------------------------------------------------------------------------
// BatchNorm
// ---------------------------------------------------------------------------

BatchNorm::BatchNorm(std::size_t channels, std::string name_prefix, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps),
      gamma_({channels}, TensorRole::parameter, name_prefix + ".gamma"),
      beta_({channels}, TensorRole::parameter, name_prefix + ".beta"),
      running_mean_({channels}), running_var_({channels}, 1.0) {
    gamma_.value.fill(1.0);
}

Tensor BatchNorm::forward(const Tensor& x, bool training) {
    require_activation(x, "BatchNorm::forward");
    const std::size_t n_len = x.dim(0), t_len = x.dim(2), v = x.dim(3), m_len = x.dim(4);
    if (x.dim(1) != channels_) {
        throw ShapeMismatch("BatchNorm: expected C=" + std::to_string(channels_) + ", got " +
                            x.shape_string());
    }
    const std::size_t plane = t_len * v * m_len;
    const std::size_t r = n_len * plane;

    trained_forward_ = training;
    xhat_ = Tensor(x.shape());
    inv_std_.assign(channels_, 0.0);
    Tensor out(x.shape());

    for (std::size_t c = 0; c < channels_; ++c) {
        double mean, var;
        if (training) {
            double sum = 0.0;
            for (std::size_t n = 0; n < n_len; ++n) {
                const double* xs = x.data() + (n * channels_ + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) sum += xs[i];
            }
            mean = sum / static_cast<double>(r);
            double sq = 0.0;
            for (std::size_t n = 0; n < n_len; ++n) {
                const double* xs = x.data() + (n * channels_ + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    const double d = xs[i] - mean;
                    sq += d * d;
                }
            }
            var = sq / static_cast<double>(r);
            const double unbiased = r > 1 ? var * static_cast<double>(r) / (r - 1.0) : var;
            const double mom =
                refresh_ ? 1.0 / static_cast<double>(c == 0 ? ++refresh_count_ : refresh_count_)
                         : momentum_;
            running_mean_[c] = (1.0 - mom) * running_mean_[c] + mom * mean;
            running_var_[c] = (1.0 - mom) * running_var_[c] + mom * unbiased;
        } else {
            mean = running_mean_[c];
            var = running_var_[c];
        }
        const double inv = 1.0 / std::sqrt(var + eps_);
        inv_std_[c] = inv;
        const double g = gamma_.value[c], b = beta_.value[c];
        for (std::size_t n = 0; n < n_len; ++n) {
            const std::size_t off = (n * channels_ + c) * plane;
            const double* xs = x.data() + off;
            double* hs = xhat_.data() + off;
            double* os = out.data() + off;
            for (std::size_t i = 0; i < plane; ++i) {
                const double h = (xs[i] - mean) * inv;
                hs[i] = h;
                os[i] = g * h + b;
            }
        }
    }
    return out;
}

Tensor BatchNorm::backward(const Tensor& gout) {
    if (xhat_.empty()) throw Error("BatchNorm::backward before forward");
    const std::size_t n_len = gout.dim(0), t_len = gout.dim(2), v = gout.dim(3),
                      m_len = gout.dim(4);
    const std::size_t plane = t_len * v * m_len;
    const double r = static_cast<double>(n_len * plane);

    Tensor gx(gout.shape());
    for (std::size_t c = 0; c < channels_; ++c) {
        double sum_g = 0.0, sum_gh = 0.0;
        for (std::size_t n = 0; n < n_len; ++n) {
            const std::size_t off = (n * channels_ + c) * plane;
            const double* gs = gout.data() + off;
            const double* hs = xhat_.data() + off;
            for (std::size_t i = 0; i < plane; ++i) {
                sum_g += gs[i];
                sum_gh += gs[i] * hs[i];
            }
        }
        gamma_.grad[c] += sum_gh;
        beta_.grad[c] += sum_g;

        const double g = gamma_.value[c], inv = inv_std_[c];
        if (trained_forward_) {
            const double coef = g * inv / r;
            for (std::size_t n = 0; n < n_len; ++n) {
                const std::size_t off = (n * channels_ + c) * plane;
                const double* gs = gout.data() + off;
                const double* hs = xhat_.data() + off;
                double* gxs = gx.data() + off;
                for (std::size_t i = 0; i < plane; ++i) {
                    gxs[i] = coef * (r * gs[i] - sum_g - hs[i] * sum_gh);
                }
            }
        } else {
            const double coef = g * inv;
            for (std::size_t n = 0; n < n_len; ++n) {
                const std::size_t off = (n * channels_ + c) * plane;
                const double* gs = gout.data() + off;
                double* gxs = gx.data() + off;
                for (std::size_t i = 0; i < plane; ++i) gxs[i] = coef * gs[i];
            }
        }
    }
    return gx;
}

std::vector<DiffTensor*> BatchNorm::params() { return {&gamma_, &beta_}; }

void BatchNorm::begin_stats_refresh() {
    refresh_ = true;
    refresh_count_ = 0;
    running_mean_.zero();
    running_var_.zero();
}

// ---------------------------------------------------------------------------
// Relu / Dropout / GlobalPool / Linear
// ---------------------------------------------------------------------------

Tensor Relu::forward(const Tensor& x) {
    mask_ = Tensor(x.shape());
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0) {
            mask_[i] = 1.0;
            out[i] = x[i];
        }
    }
    return out;
}

Tensor Relu::backward(const Tensor& gout) {
    Tensor gx(gout.shape());
    for (std::size_t i = 0; i < gout.size(); ++i) gx[i] = gout[i] * mask_[i];
    return gx;
}

Tensor Dropout::forward(const Tensor& x, bool training, std::mt19937_64& rng) {
    active_ = training && p_ > 0.0;
    if (!active_) return x;
    const double keep = 1.0 - p_;
    std::bernoulli_distribution coin(keep);
    scale_mask_ = Tensor(x.shape());
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = coin(rng) ? 1.0 / keep : 0.0;
        scale_mask_[i] = s;
        out[i] = x[i] * s;
    }
    return out;
}

Tensor Dropout::backward(const Tensor& gout) {
    if (!active_) return gout;
    Tensor gx(gout.shape());
    for (std::size_t i = 0; i < gout.size(); ++i) gx[i] = gout[i] * scale_mask_[i];
    return gx;
}

Tensor GlobalPool::forward(const Tensor& x) {
    require_activation(x, "GlobalPool::forward");
    const std::size_t n_len = x.dim(0), c_len = x.dim(1), t_len = x.dim(2), v = x.dim(3),
                      m_len = x.dim(4);
    in_shape_ = x.shape();
    argmax_m_.assign(n_len * c_len, 0);
    const double scale = 1.0 / static_cast<double>(t_len * v);

    Tensor out({n_len, c_len});
    for (std::size_t n = 0; n < n_len; ++n) {
        for (std::size_t c = 0; c < c_len; ++c) {
            double best = 0.0;
            std::size_t best_m = 0;
            for (std::size_t m = 0; m < m_len; ++m) {
                double sum = 0.0;
                const double* base = x.data() + ((n * c_len + c) * t_len) * v * m_len + m;
                for (std::size_t i = 0; i < t_len * v; ++i) sum += base[i * m_len];
                const double avg = sum * scale;
                if (m == 0 || avg > best) {
                    best = avg;
                    best_m = m;
                }
            }
            out.at(n, c) = best;
            argmax_m_[n * c_len + c] = best_m;
        }
    }
    return out;
}

Tensor GlobalPool::backward(const Tensor& gout) {
    if (in_shape_.empty()) throw Error("GlobalPool::backward before forward");
    const std::size_t n_len = in_shape_[0], c_len = in_shape_[1], t_len = in_shape_[2],
                      v = in_shape_[3], m_len = in_shape_[4];
    const double scale = 1.0 / static_cast<double>(t_len * v);
    Tensor gx(in_shape_);
    for (std::size_t n = 0; n < n_len; ++n) {
        for (std::size_t c = 0; c < c_len; ++c) {
            const double g = gout.at(n, c) * scale;
            const std::size_t m = argmax_m_[n * c_len + c];
            double* base = gx.data() + ((n * c_len + c) * t_len) * v * m_len + m;
            for (std::size_t i = 0; i < t_len * v; ++i) base[i * m_len] = g;
        }
    }
    return gx;
}

Linear::Linear(std::size_t c_in, std::size_t c_out, std::string name_prefix)
    : c_in_(c_in), c_out_(c_out),
      w_({c_out, c_in}, TensorRole::parameter, name_prefix + ".w"),
      bias_({c_out}, TensorRole::parameter, name_prefix + ".bias") {}

void Linear::init_params(std::mt19937_64& rng) {
    init_uniform_fan_in(w_.value, c_in_, rng);
}

Tensor Linear::forward(const Tensor& x) {
    if (x.rank() != 2 || x.dim(1) != c_in_) {
        throw ShapeMismatch("Linear: expected (N," + std::to_string(c_in_) + "), got " +
                            x.shape_string());
    }
    x_cache_ = x;
    const std::size_t n_len = x.dim(0);
    Tensor out({n_len, c_out_});
    for (std::size_t n = 0; n < n_len; ++n) {
        for (std::size_t k = 0; k < c_out_; ++k) {
            out.at(n, k) = bias_.value[k] + dot(w_.value.data() + k * c_in_,
                                                x.data() + n * c_in_, c_in_);
        }
    }
    return out;
}

Tensor Linear::backward(const Tensor& gout) {
    const Tensor& x = x_cache_;
    if (x.empty()) throw Error("Linear::backward before forward");
    const std::size_t n_len = x.dim(0);
    Tensor gx({n_len, c_in_});
    for (std::size_t n = 0; n < n_len; ++n) {
        for (std::size_t k = 0; k < c_out_; ++k) {
            const double g = gout.at(n, k);
            if (g == 0.0) continue;
            bias_.grad[k] += g;
            axpy(w_.grad.data() + k * c_in_, x.data() + n * c_in_, c_in_, g);
            axpy(gx.data() + n * c_in_, w_.value.data() + k * c_in_, c_in_, g);
        }
    }
    return gx;
}

std::vector<DiffTensor*> Linear::params() { return {&w_, &bias_}; }

// ---------------------------------------------------------------------------
// GcnBlock
// ---------------------------------------------------------------------------

GcnBlock::GcnBlock(std::size_t c_in, std::size_t c_out, std::size_t stride, std::size_t kernel,
                   const SpatialAdjacency& adj, bool structural, std::string name_prefix)
    : c_in_(c_in), c_out_(c_out), stride_(stride),
      gcn_(c_in, c_out, adj, structural, name_prefix + ".gcn"),
      bn_(c_out, name_prefix + ".bn"),
      tconv_(c_out, c_out, kernel, stride, name_prefix + ".tconv") {
    if (c_in != c_out) {
        proj_.emplace(std::vector<std::size_t>{c_out, c_in}, TensorRole::parameter,
                      name_prefix + ".proj");
    }
}

void GcnBlock::init_params(std::mt19937_64& rng) {
    gcn_.init_params(rng);
    tconv_.init_params(rng);
    if (proj_) init_uniform_fan_in(proj_->value, c_in_, rng);
}

Tensor GcnBlock::forward(const Tensor& x, const Tensor& as_batch, bool training) {
    x_cache_ = x;
    Tensor h = gcn_.forward(x, as_batch);
    h = bn_.forward(h, training);
    h = relu_.forward(h);
    h = tconv_.forward(h);

    // residual path: strided identity, projected across channels if needed
    const std::size_t n_len = x.dim(0), t_in = x.dim(2), v = x.dim(3), m_len = x.dim(4);
    const std::size_t t_out = h.dim(2);
    const std::size_t span = v * m_len;
    if (proj_) {
        const double* pw = proj_->value.data();
        for (std::size_t n = 0; n < n_len; ++n) {
            for (std::size_t co = 0; co < c_out_; ++co) {
                double* hb = h.data() + ((n * c_out_ + co) * t_out) * span;
                for (std::size_t ci = 0; ci < c_in_; ++ci) {
                    const double wv = pw[co * c_in_ + ci];
                    if (wv == 0.0) continue;
                    const double* xb = x.data() + ((n * c_in_ + ci) * t_in) * span;
                    for (std::size_t to = 0; to < t_out; ++to) {
                        axpy(hb + to * span, xb + to * stride_ * span, span, wv);
                    }
                }
            }
        }
    } else {
        for (std::size_t n = 0; n < n_len; ++n) {
            for (std::size_t c = 0; c < c_out_; ++c) {
                double* hb = h.data() + ((n * c_out_ + c) * t_out) * span;
                const double* xb = x.data() + ((n * c_in_ + c) * t_in) * span;
                for (std::size_t to = 0; to < t_out; ++to) {
                    axpy(hb + to * span, xb + to * stride_ * span, span, 1.0);
                }
            }
        }
    }
    return h;
}

Tensor GcnBlock::backward(const Tensor& gout) {
    const Tensor& x = x_cache_;
    if (x.empty()) throw Error("GcnBlock::backward before forward");

    Tensor g = tconv_.backward(gout);
    g = relu_.backward(g);
    g = bn_.backward(g);
    Tensor gx = gcn_.backward(g);

    const std::size_t n_len = x.dim(0), t_in = x.dim(2), v = x.dim(3), m_len = x.dim(4);
    const std::size_t t_out = gout.dim(2);
    const std::size_t span = v * m_len;
    if (proj_) {
        const double* pw = proj_->value.data();
        double* gp = proj_->grad.data();
        for (std::size_t n = 0; n < n_len; ++n) {
            for (std::size_t co = 0; co < c_out_; ++co) {
                const double* gb = gout.data() + ((n * c_out_ + co) * t_out) * span;
                for (std::size_t ci = 0; ci < c_in_; ++ci) {
                    const double* xb = x.data() + ((n * c_in_ + ci) * t_in) * span;
                    double* gxb = gx.data() + ((n * c_in_ + ci) * t_in) * span;
                    const double wv = pw[co * c_in_ + ci];
                    double acc = 0.0;
                    for (std::size_t to = 0; to < t_out; ++to) {
                        acc += dot(gb + to * span, xb + to * stride_ * span, span);
                        if (wv != 0.0) axpy(gxb + to * stride_ * span, gb + to * span, span, wv);
                    }
                    gp[co * c_in_ + ci] += acc;
                }
            }
        }
    } else {
        for (std::size_t n = 0; n < n_len; ++n) {
            for (std::size_t c = 0; c < c_out_; ++c) {
                const double* gb = gout.data() + ((n * c_out_ + c) * t_out) * span;
                double* gxb = gx.data() + ((n * c_in_ + c) * t_in) * span;
                for (std::size_t to = 0; to < t_out; ++to) {
                    axpy(gxb + to * stride_ * span, gb + to * span, span, 1.0);
                }
            }
        }
    }
    return gx;
}

std::vector<DiffTensor*> GcnBlock::params() {
    std::vector<DiffTensor*> out = gcn_.params();
    for (DiffTensor* p : bn_.params()) out.push_back(p);
    for (DiffTensor* p : tconv_.params()) out.push_back(p);
    if (proj_) out.push_back(&*proj_);
    return out;
}

// ---------------------------------------------------------------------------
// ModelConfig
// ---------------------------------------------------------------------------

ModelConfig ModelConfig::defaults(std::size_t num_classes) {
    ModelConfig cfg;
    cfg.stages = {{6, 32, 1}, {32, 32, 1}, {32, 48, 2}, {48, 48, 1}, {48, 64, 2}};
    cfg.num_classes = num_classes;
    return cfg;
}

ModelConfig ModelConfig::desk(std::size_t num_classes) {
    ModelConfig cfg;
    cfg.stages = {{6, 6, 1}, {6, 6, 1}, {6, 8, 2}, {8, 8, 1}, {8, 12, 2}};
    cfg.num_classes = num_classes;
    cfg.bodies = 1;
    return cfg;
}

void ModelConfig::validate() const {
    if (stages.empty()) throw Error("ModelConfig: at least one stage required");
    if (num_classes == 0) throw Error("ModelConfig: num_classes must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw Error("ModelConfig: dropout must be in [0,1)");
    if (temporal_kernel % 2 == 0) throw Error("ModelConfig: temporal kernel must be odd");
    if (stages[0].c_in != input_channels) {
        throw Error("ModelConfig: first stage input must match input_channels");
    }
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (stages[i].c_in == 0 || stages[i].c_out == 0 || stages[i].stride == 0) {
            throw Error("ModelConfig: stage widths and strides must be positive");
        }
        if (i > 0 && stages[i].c_in != stages[i - 1].c_out) {
            throw Error("ModelConfig: stage " + std::to_string(i) + " input width mismatch");
        }
    }
}

std::size_t ModelConfig::output_frames() const {
    std::size_t t = input_frames;
    for (const StageSpec& s : stages) t = TemporalConv::out_frames(t, temporal_kernel, s.stride);
    return t;
}

std::string model_config_to_text(const ModelConfig& cfg) {
    std::ostringstream os;
    os << "stages =";
    for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
        os << (i ? "," : " ") << cfg.stages[i].c_in << ":" << cfg.stages[i].c_out << ":"
           << cfg.stages[i].stride;
    }
    os << "\n";
    os << "temporal_kernel = " << cfg.temporal_kernel << "\n";
    os << "dropout = " << cfg.dropout << "\n";
    os << "num_classes = " << cfg.num_classes << "\n";
    os << "structural = " << (cfg.structural ? 1 : 0) << "\n";
    os << "joints = " << cfg.joints << "\n";
    os << "bodies = " << cfg.bodies << "\n";
    os << "input_frames = " << cfg.input_frames << "\n";
    os << "input_channels = " << cfg.input_channels << "\n";
    os << "max_hop = " << cfg.max_hop << "\n";
    os << "alpha = " << cfg.alpha << "\n";
    return os.str();
}

ModelConfig model_config_from_text(const std::string& text) {
    ModelConfig cfg;
    cfg.stages.clear();
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw MalformedFile("model config: missing '=' in " + line);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "stages") {
            std::istringstream vs(val);
            std::string item;
            while (std::getline(vs, item, ',')) {
                StageSpec st;
                if (std::sscanf(item.c_str(), "%zu:%zu:%zu", &st.c_in, &st.c_out, &st.stride) != 3) {
                    throw MalformedFile("model config: bad stage '" + item + "'");
                }
                cfg.stages.push_back(st);
            }
        } else if (key == "temporal_kernel") {
            cfg.temporal_kernel = std::stoul(val);
        } else if (key == "dropout") {
            cfg.dropout = std::stod(val);
        } else if (key == "num_classes") {
            cfg.num_classes = std::stoul(val);
        } else if (key == "structural") {
            cfg.structural = val != "0";
        } else if (key == "joints") {
            cfg.joints = std::stoul(val);
        } else if (key == "bodies") {
            cfg.bodies = std::stoul(val);
        } else if (key == "input_frames") {
            cfg.input_frames = std::stoul(val);
        } else if (key == "input_channels") {
            cfg.input_channels = std::stoul(val);
        } else if (key == "max_hop") {
            cfg.max_hop = std::stoi(val);
        } else if (key == "alpha") {
            cfg.alpha = std::stod(val);
        } else {
            throw MalformedFile("model config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// SpStGcnModel
// ---------------------------------------------------------------------------

SpStGcnModel::SpStGcnModel(ModelConfig cfg, const GraphSpec& graph, std::uint64_t seed)
    : cfg_(std::move(cfg)), dropout_(cfg_.dropout),
      fc_(cfg_.stages.empty() ? 1 : cfg_.stages.back().c_out, std::max<std::size_t>(cfg_.num_classes, 1),
          "fc"),
      rng_(seed) {
    cfg_.validate();
    if (graph.joint_count != cfg_.joints) {
        throw ShapeMismatch("model: graph joints " + std::to_string(graph.joint_count) +
                            " != config joints " + std::to_string(cfg_.joints));
    }
    const SpatialAdjacency adj = build_spatial_adjacency(graph, cfg_.max_hop, cfg_.alpha);
    blocks_.reserve(cfg_.stages.size());
    for (std::size_t i = 0; i < cfg_.stages.size(); ++i) {
        const StageSpec& st = cfg_.stages[i];
        blocks_.emplace_back(st.c_in, st.c_out, st.stride, cfg_.temporal_kernel, adj,
                             cfg_.structural, "stage" + std::to_string(i));
    }
    for (GcnBlock& b : blocks_) b.init_params(rng_);
    fc_.init_params(rng_);
}

Tensor SpStGcnModel::forward(const Tensor& x, const Tensor& as_batch) {
    require_activation(x, "SpStGcnModel::forward");
    Tensor h = x;
    for (GcnBlock& b : blocks_) h = b.forward(h, as_batch, training_);
    h = pool_.forward(h);
    h = dropout_.forward(h, training_, rng_);
    return fc_.forward(h);
}

Tensor SpStGcnModel::backward(const Tensor& dlogits) {
    Tensor g = fc_.backward(dlogits);
    g = dropout_.backward(g);
    g = pool_.backward(g);
    for (std::size_t i = blocks_.size(); i-- > 0;) g = blocks_[i].backward(g);
    return g;
}

std::vector<DiffTensor*> SpStGcnModel::params() {
    std::vector<DiffTensor*> out;
    for (GcnBlock& b : blocks_) {
        for (DiffTensor* p : b.params()) out.push_back(p);
    }
    for (DiffTensor* p : fc_.params()) out.push_back(p);
    return out;
}

void SpStGcnModel::zero_grad() {
    for (DiffTensor* p : params()) p->zero_grad();
}

void SpStGcnModel::set_structural_enabled(bool on) {
    for (GcnBlock& b : blocks_) b.gcn().set_structural_enabled(on);
}

void SpStGcnModel::begin_bn_refresh() {
    for (GcnBlock& b : blocks_) b.bn().begin_stats_refresh();
}

void SpStGcnModel::end_bn_refresh() {
    for (GcnBlock& b : blocks_) b.bn().end_stats_refresh();
}

double SpStGcnModel::edge_node_smoothing(const Tensor& x, const Tensor& as_batch,
                                         const std::vector<int>& edge_nodes) {
    Tensor h = x;
    for (GcnBlock& b : blocks_) h = b.forward(h, as_batch, false);
    const std::size_t n_len = h.dim(0), c_len = h.dim(1), t_len = h.dim(2), m_len = h.dim(4);
    double total = 0.0;
    std::size_t pairs = 0;
    std::vector<double> col_a(c_len * t_len * m_len), col_b(col_a.size());
    auto gather = [&](std::size_t n, std::size_t joint, std::vector<double>& col) {
        std::size_t k = 0;
        for (std::size_t c = 0; c < c_len; ++c) {
            for (std::size_t t = 0; t < t_len; ++t) {
                for (std::size_t m = 0; m < m_len; ++m) {
                    col[k++] = h.at(n, c, t, joint, m);
                }
            }
        }
    };
    for (std::size_t n = 0; n < n_len; ++n) {
        for (std::size_t i = 0; i < edge_nodes.size(); ++i) {
            gather(n, static_cast<std::size_t>(edge_nodes[i]), col_a);
            for (std::size_t j = i + 1; j < edge_nodes.size(); ++j) {
                gather(n, static_cast<std::size_t>(edge_nodes[j]), col_b);
                const double na = std::sqrt(dot(col_a.data(), col_a.data(), col_a.size()));
                const double nb = std::sqrt(dot(col_b.data(), col_b.data(), col_b.size()));
                if (na > 0.0 && nb > 0.0) {
                    total += dot(col_a.data(), col_b.data(), col_a.size()) / (na * nb);
                    ++pairs;
                }
            }
        }
    }
    return pairs ? total / static_cast<double>(pairs) : 0.0;
}

Tensor stack_batch(const std::vector<const Tensor*>& samples) {
    if (samples.empty()) throw Error("stack_batch: empty batch");
    const std::vector<std::size_t>& s = samples[0]->shape();
    if (s.size() != 4) throw ShapeMismatch("stack_batch: samples must be rank-4 (C,T,V,M)");
    Tensor out({samples.size(), s[0], s[1], s[2], s[3]});
    const std::size_t stride = samples[0]->size();
    for (std::size_t n = 0; n < samples.size(); ++n) {
        if (!samples[n]->same_shape(*samples[0])) {
            throw ShapeMismatch("stack_batch: inconsistent sample shapes");
        }
        std::memcpy(out.data() + n * stride, samples[n]->data(), stride * sizeof(double));
    }
    return out;
}

Tensor stack_adjacency(const std::vector<const Tensor*>& matrices) {
    if (matrices.empty()) throw Error("stack_adjacency: empty batch");
    const std::size_t v = matrices[0]->dim(0);
    Tensor out({matrices.size(), v, v});
    for (std::size_t n = 0; n < matrices.size(); ++n) {
        if (matrices[n]->rank() != 2 || matrices[n]->dim(0) != v || matrices[n]->dim(1) != v) {
            throw ShapeMismatch("stack_adjacency: inconsistent matrix shapes");
        }
        std::memcpy(out.data() + n * v * v, matrices[n]->data(), v * v * sizeof(double));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

LossResult cross_entropy_loss(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.rank() != 2) {
        throw ShapeMismatch("cross_entropy_loss: expected (N,K) logits, got " +
                            logits.shape_string());
    }
    const std::size_t n_len = logits.dim(0), k_len = logits.dim(1);
    if (labels.size() != n_len) {
        throw ShapeMismatch("cross_entropy_loss: batch size mismatch");
    }
    LossResult res;
    res.grad_logits = Tensor({n_len, k_len});
    const double inv_n = 1.0 / static_cast<double>(n_len);
    for (std::size_t n = 0; n < n_len; ++n) {
        const int label = labels[n];
        if (label < 0 || static_cast<std::size_t>(label) >= k_len) {
            throw LabelOutOfRange("cross_entropy_loss: label " + std::to_string(label) +
                                  " outside [0," + std::to_string(k_len) + ")");
        }
        const double* row = logits.data() + n * k_len;
        double mx = row[0];
        for (std::size_t k = 1; k < k_len; ++k) mx = std::max(mx, row[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < k_len; ++k) sum += std::exp(row[k] - mx);
        const double lse = mx + std::log(sum);
        res.value += (lse - row[label]) * inv_n;
        double* grow = res.grad_logits.data() + n * k_len;
        for (std::size_t k = 0; k < k_len; ++k) {
            grow[k] = (std::exp(row[k] - lse) - (static_cast<std::size_t>(label) == k ? 1.0 : 0.0)) *
                      inv_n;
        }
    }
    return res;
}

LossResult cross_entropy_loss(const Tensor& logits, int label) {
    if (logits.rank() == 1) {
        Tensor batched({1, logits.dim(0)});
        std::memcpy(batched.data(), logits.data(), logits.size() * sizeof(double));
        return cross_entropy_loss(batched, std::vector<int>{label});
    }
    return cross_entropy_loss(logits, std::vector<int>{label});
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<DiffTensor*>& tensors, double step) {
    GradCheckReport report;
    for (DiffTensor* t : tensors) {
        const Tensor analytic = t->grad;
        double max_diff = 0.0, max_mag = 0.0;
        for (std::size_t i = 0; i < t->value.size(); ++i) {
            const double saved = t->value[i];
            t->value[i] = saved + step;
            const double up = loss_fn();
            t->value[i] = saved - step;
            const double down = loss_fn();
            t->value[i] = saved;
            const double fd = (up - down) / (2.0 * step);
            max_diff = std::max(max_diff, std::abs(fd - analytic[i]));
            max_mag = std::max({max_mag, std::abs(fd), std::abs(analytic[i])});
        }
        GradCheckEntry entry;
        entry.name = t->name.empty() ? "<unnamed>" : t->name;
        entry.max_rel_error = max_diff / std::max(1.0, max_mag);
        report.worst = std::max(report.worst, entry.max_rel_error);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

namespace {

// Tiny 4-joint path graph used by the prebuilt checks.
GraphSpec tiny_graph() {
    GraphSpec g;
    g.joint_count = 4;
    g.edges = {{0, 1}, {1, 2}, {2, 3}};
    g.center_joint = 1;
    g.edge_nodes = {0, 3};
    g.parent_map = derive_parent_map(g);
    return g;
}

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

// Random structural matrices with valid invariants for the tiny graph.
Tensor random_as_batch(std::size_t n_len, const GraphSpec& g, std::mt19937_64& rng) {
    const std::size_t v = g.joint_count;
    Tensor as({n_len, v, v});
    std::uniform_real_distribution<double> dist(0.2, 2.0);
    for (std::size_t n = 0; n < n_len; ++n) {
        for (std::size_t i = 0; i < v; ++i) as[n * v * v + i * v + i] = 1.0;
        for (std::size_t i = 0; i < g.edge_nodes.size(); ++i) {
            for (std::size_t j = i + 1; j < g.edge_nodes.size(); ++j) {
                const std::size_t a = static_cast<std::size_t>(g.edge_nodes[i]);
                const std::size_t b = static_cast<std::size_t>(g.edge_nodes[j]);
                const double value = -1.0 / dist(rng);
                as[n * v * v + a * v + b] = value;
                as[n * v * v + b * v + a] = value;
            }
        }
    }
    return as;
}

// Fixed random projection turns a tensor output into a scalar loss.
double weighted_sum(const Tensor& t, const Tensor& weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * weights[i];
    return s;
}

} // namespace

GradCheckReport grad_check_spst_layer(std::uint64_t seed, double step) {
    std::mt19937_64 rng(seed);
    const GraphSpec g = tiny_graph();
    const SpatialAdjacency adj = build_spatial_adjacency(g, 2, 1e-3);

    SpStGcnLayer layer(2, 3, adj, true, "layer");
    layer.init_params(rng);
    // exercise nonzero B as well
    for (std::size_t j = 0; j < layer.partitions(); ++j) {
        layer.spatial_mask(j).value = random_tensor({g.joint_count, g.joint_count}, rng, 0.3);
    }

    DiffTensor input({2, 2, 3, g.joint_count, 1}, TensorRole::input, "layer.input");
    input.value = random_tensor(input.value.shape(), rng);
    const Tensor as = random_as_batch(2, g, rng);
    const Tensor proj = random_tensor({2, 3, 3, g.joint_count, 1}, rng);

    auto loss_fn = [&]() { return weighted_sum(layer.forward_spatial(input.value), proj) +
                                  weighted_sum(layer.forward_structural(input.value, as), proj); };
    // analytic pass through the caching forward/backward
    for (DiffTensor* p : layer.params()) p->zero_grad();
    input.zero_grad();
    layer.forward(input.value, as);
    input.grad = layer.backward(proj);

    std::vector<DiffTensor*> tensors = layer.params();
    tensors.push_back(&input);
    return grad_check(loss_fn, tensors, step);
}

GradCheckReport grad_check_temporal_conv(std::uint64_t seed, double step) {
    std::mt19937_64 rng(seed);
    TemporalConv conv(2, 3, 3, 2, "tconv");
    conv.init_params(rng);
    conv.bias().value = random_tensor({3}, rng, 0.5);

    DiffTensor input({2, 2, 7, 4, 1}, TensorRole::input, "tconv.input");
    input.value = random_tensor(input.value.shape(), rng);
    const std::size_t t_out = TemporalConv::out_frames(7, 3, 2);
    const Tensor proj = random_tensor({2, 3, t_out, 4, 1}, rng);

    auto loss_fn = [&]() { return weighted_sum(conv.forward(input.value), proj); };
    for (DiffTensor* p : conv.params()) p->zero_grad();
    input.zero_grad();
    conv.forward(input.value);
    input.grad = conv.backward(proj);

    std::vector<DiffTensor*> tensors = conv.params();
    tensors.push_back(&input);
    return grad_check(loss_fn, tensors, step);
}

GradCheckReport grad_check_block(std::uint64_t seed, double step) {
    std::mt19937_64 rng(seed);
    const GraphSpec g = tiny_graph();
    const SpatialAdjacency adj = build_spatial_adjacency(g, 2, 1e-3);

    GcnBlock block(2, 3, 2, 3, adj, true, "block");
    block.init_params(rng);

    DiffTensor input({2, 2, 6, g.joint_count, 1}, TensorRole::input, "block.input");
    input.value = random_tensor(input.value.shape(), rng);
    const Tensor as = random_as_batch(2, g, rng);
    const std::size_t t_out = TemporalConv::out_frames(6, 3, 2);
    const Tensor proj = random_tensor({2, 3, t_out, g.joint_count, 1}, rng);

    auto loss_fn = [&]() { return weighted_sum(block.forward(input.value, as, true), proj); };
    for (DiffTensor* p : block.params()) p->zero_grad();
    input.zero_grad();
    block.forward(input.value, as, true);
    input.grad = block.backward(proj);

    std::vector<DiffTensor*> tensors = block.params();
    tensors.push_back(&input);
    return grad_check(loss_fn, tensors, step);
}

GradCheckReport grad_check_model(std::uint64_t seed, double step) {
    std::mt19937_64 rng(seed);
    const GraphSpec g = tiny_graph();

    ModelConfig cfg;
    cfg.stages = {{2, 3, 2}};
    cfg.temporal_kernel = 3;
    cfg.dropout = 0.0; // keep the loss deterministic
    cfg.num_classes = 3;
    cfg.joints = g.joint_count;
    cfg.bodies = 1;
    cfg.input_frames = 6;
    cfg.input_channels = 2;

    SpStGcnModel model(cfg, g, seed);
    model.set_training(true);

    DiffTensor input({3, 2, 6, g.joint_count, 1}, TensorRole::input, "model.input");
    input.value = random_tensor(input.value.shape(), rng);
    const Tensor as = random_as_batch(3, g, rng);
    const std::vector<int> labels = {0, 2, 1};

    auto loss_fn = [&]() {
        return cross_entropy_loss(model.forward(input.value, as), labels).value;
    };
    model.zero_grad();
    input.zero_grad();
    const Tensor logits = model.forward(input.value, as);
    const LossResult loss = cross_entropy_loss(logits, labels);
    input.grad = model.backward(loss.grad_logits);

    std::vector<DiffTensor*> tensors = model.params();
    tensors.push_back(&input);
    return grad_check(loss_fn, tensors, step);
}

GradCheckReport grad_check_loss(std::uint64_t seed, double step) {
    std::mt19937_64 rng(seed);
    DiffTensor logits({4, 5}, TensorRole::input, "loss.logits");
    logits.value = random_tensor(logits.value.shape(), rng, 2.0);
    const std::vector<int> labels = {1, 0, 4, 2};

    auto loss_fn = [&]() { return cross_entropy_loss(logits.value, labels).value; };
    const LossResult res = cross_entropy_loss(logits.value, labels);
    logits.grad = res.grad_logits;
    return grad_check(loss_fn, {&logits}, step);
}

} // namespace spstgcn
