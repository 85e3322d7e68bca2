#include "etd/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "etd/kernels.hpp"

namespace etd {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Layer-specific values the reverse pass needs beyond the activations.
struct TraceEntry {
  Tensor z;                          // preactivation (dense/conv with relu)
  Tensor mask;                       // dropout multiplier (train mode)
  std::vector<std::size_t> winners;  // maxpool argmax, offset within sample
  Tensor gi, gf, gg, go, c, tc, h;   // lstm gate/state history [N,T,u]
};

struct ForwardTrace {
  std::vector<Tensor> acts;  // acts[k] = input of layer k; acts.back() = probs
  std::vector<TraceEntry> extra;
};

std::size_t batch_rows(const NeuralModel& model, const Tensor& batch) {
  const std::size_t per = shape_product(model.input_shape);
  if (batch.size() == per) return 1;
  if (batch.shape.empty() || batch.size() % per != 0 ||
      batch.shape[0] != batch.size() / per)
    throw std::invalid_argument("batch shape " + shape_string(batch.shape) +
                                " does not match model input shape " +
                                shape_string(model.input_shape));
  return batch.shape[0];
}

std::vector<std::size_t> with_batch(std::size_t n, const std::vector<std::size_t>& per) {
  std::vector<std::size_t> s;
  s.reserve(per.size() + 1);
  s.push_back(n);
  s.insert(s.end(), per.begin(), per.end());
  return s;
}

void relu_inplace(Tensor& t) {
  for (double& v : t.values) v = v > 0.0 ? v : 0.0;
}

Tensor softmax_rows(const Tensor& logits, double temperature) {
  const std::size_t n = logits.shape[0], c = logits.shape[1];
  Tensor p = logits;
  for (std::size_t i = 0; i < n; ++i) {
    double* row = p.values.data() + i * c;
    double m = row[0];
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      row[j] = std::exp((row[j] - m) / temperature);
      sum += row[j];
    }
    for (std::size_t j = 0; j < c; ++j) row[j] /= sum;
  }
  return p;
}

// Applies layer `k` to `x`; fills `te` when tracing (needed for backward).
Tensor forward_layer(const NeuralModel& model, std::size_t k, const Tensor& x,
                     Mode mode, Rng* rng, TraceEntry* te) {
  const LayerSpec& spec = model.layers[k];
  const std::size_t n = x.shape[0];
  switch (spec.kind) {
    case LayerKind::Dense:
    case LayerKind::SoftmaxOutput: {
      const Tensor& w = model.params[k].tensors[0];
      const Tensor& b = model.params[k].tensors[1];
      const std::size_t d = w.shape[0], u = w.shape[1];
      Tensor z({n, u}, std::vector<double>(n * u));
      kernels::matmul_bias(x.data(), n, d, w.data(), u, b.data(), z.values.data());
      if (spec.kind == LayerKind::SoftmaxOutput) {
        Tensor p = softmax_rows(z, model.temperature);
        ensure_finite(p, "softmax output");
        return p;
      }
      if (spec.activation == Activation::Relu) {
        Tensor out = z;
        relu_inplace(out);
        if (te) te->z = std::move(z);
        return out;
      }
      return z;
    }
    case LayerKind::Conv2D: {
      const Tensor& kern = model.params[k].tensors[0];
      const Tensor& b = model.params[k].tensors[1];
      const std::size_t h = x.shape[1], w = x.shape[2], ci = x.shape[3];
      const std::size_t co = spec.units;
      Tensor z({n, h, w, co}, std::vector<double>(n * h * w * co));
      kernels::conv2d_forward(x.data(), n, h, w, ci, kern.data(), co, b.data(),
                              z.values.data());
      if (spec.activation == Activation::Relu) {
        Tensor out = z;
        relu_inplace(out);
        if (te) te->z = std::move(z);
        return out;
      }
      return z;
    }
    case LayerKind::MaxPool2D: {
      const std::size_t h = x.shape[1], w = x.shape[2], c = x.shape[3];
      const std::size_t oh = h / 2, ow = w / 2;
      Tensor out({n, oh, ow, c}, std::vector<double>(n * oh * ow * c));
      std::vector<std::size_t> winners(te ? out.size() : 0);
      for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.data() + i * h * w * c;
        double* oi = out.values.data() + i * oh * ow * c;
        for (std::size_t r = 0; r < oh; ++r)
          for (std::size_t cc = 0; cc < ow; ++cc)
            for (std::size_t ch = 0; ch < c; ++ch) {
              std::size_t best = (2 * r * w + 2 * cc) * c + ch;
              double bv = xi[best];
              const std::size_t cand[3] = {(2 * r * w + 2 * cc + 1) * c + ch,
                                           ((2 * r + 1) * w + 2 * cc) * c + ch,
                                           ((2 * r + 1) * w + 2 * cc + 1) * c + ch};
              for (std::size_t t = 0; t < 3; ++t)
                if (xi[cand[t]] > bv) {
                  bv = xi[cand[t]];
                  best = cand[t];
                }
              const std::size_t o = (r * ow + cc) * c + ch;
              oi[o] = bv;
              if (te) winners[i * oh * ow * c + o] = best;
            }
      }
      if (te) te->winners = std::move(winners);
      return out;
    }
    case LayerKind::Dropout: {
      if (mode == Mode::Infer) return x;
      if (!rng)
        throw std::invalid_argument("dropout in train mode needs an rng");
      const double keep_scale = 1.0 / (1.0 - spec.rate);
      Tensor mask(x.shape, std::vector<double>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i)
        mask.values[i] = rng->uniform01() < spec.rate ? 0.0 : keep_scale;
      Tensor out = x;
      for (std::size_t i = 0; i < x.size(); ++i) out.values[i] *= mask.values[i];
      if (te) te->mask = std::move(mask);
      return out;
    }
    case LayerKind::Flatten: {
      Tensor out = x;
      out.shape = {n, x.size() / n};
      return out;
    }
    case LayerKind::Reshape: {
      Tensor out = x;
      out.shape = {n, spec.rows, spec.cols, 1};
      return out;
    }
    case LayerKind::Lstm: {
      const Tensor& wx = model.params[k].tensors[0];
      const Tensor& wh = model.params[k].tensors[1];
      const Tensor& b = model.params[k].tensors[2];
      const std::size_t tlen = x.shape[1], d = x.shape[2], u = spec.units;
      const std::size_t g4 = 4 * u;
      Tensor gi({n, tlen, u}, std::vector<double>(n * tlen * u));
      Tensor gf = gi, gg = gi, go = gi, cst = gi, tc = gi, hs = gi;
      std::vector<double> xt(n * d), zt(n * g4), hprev(n * u, 0.0), cprev(n * u, 0.0);
      for (std::size_t t = 0; t < tlen; ++t) {
        for (std::size_t i = 0; i < n; ++i)
          std::memcpy(xt.data() + i * d, x.data() + (i * tlen + t) * d,
                      d * sizeof(double));
        kernels::matmul_bias(xt.data(), n, d, wx.data(), g4, b.data(), zt.data());
        kernels::matmul_acc(hprev.data(), n, u, wh.data(), g4, zt.data());
        for (std::size_t i = 0; i < n; ++i) {
          const double* zr = zt.data() + i * g4;
          for (std::size_t j = 0; j < u; ++j) {
            const double iv = sigmoid(zr[j]);
            const double fv = sigmoid(zr[u + j]);
            const double gv = std::tanh(zr[2 * u + j]);
            const double ov = sigmoid(zr[3 * u + j]);
            const double cv = fv * cprev[i * u + j] + iv * gv;
            const double tcv = std::tanh(cv);
            const double hv = ov * tcv;
            const std::size_t at = (i * tlen + t) * u + j;
            gi.values[at] = iv;
            gf.values[at] = fv;
            gg.values[at] = gv;
            go.values[at] = ov;
            cst.values[at] = cv;
            tc.values[at] = tcv;
            hs.values[at] = hv;
            hprev[i * u + j] = hv;
            cprev[i * u + j] = cv;
          }
        }
      }
      Tensor out;
      if (spec.return_sequences) {
        out = hs;
      } else {
        out = Tensor({n, u}, std::vector<double>(n * u));
        for (std::size_t i = 0; i < n; ++i)
          std::memcpy(out.values.data() + i * u,
                      hs.values.data() + (i * tlen + (tlen - 1)) * u,
                      u * sizeof(double));
      }
      if (te) {
        te->gi = std::move(gi);
        te->gf = std::move(gf);
        te->gg = std::move(gg);
        te->go = std::move(go);
        te->c = std::move(cst);
        te->tc = std::move(tc);
        te->h = std::move(hs);
      }
      return out;
    }
  }
  throw std::logic_error("forward_layer: unknown layer kind");
}

Tensor run_forward(const NeuralModel& model, const Tensor& batch, Mode mode,
                   Rng* rng, ForwardTrace* trace) {
  const std::size_t n = batch_rows(model, batch);
  Tensor cur(with_batch(n, model.input_shape), batch.values);
  if (trace) {
    trace->acts.clear();
    trace->extra.assign(model.layers.size(), TraceEntry{});
  }
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    if (trace) trace->acts.push_back(cur);
    Tensor next = forward_layer(model, k, cur, mode, rng,
                                trace ? &trace->extra[k] : nullptr);
    cur = std::move(next);
  }
  if (trace) trace->acts.push_back(cur);
  return cur;
}

// Reverse pass from d(objective)/d(logits) of the final softmax layer.
// Fills `param_grads` (already allocated, zeroed) when non-null; returns
// d(objective)/d(input) when want_input.
Tensor backprop(const NeuralModel& model, const ForwardTrace& trace,
                const Tensor& dlogits, std::vector<LayerParams>* param_grads,
                bool want_input) {
  Tensor dy = dlogits;
  for (std::size_t ki = model.layers.size(); ki-- > 0;) {
    const LayerSpec& spec = model.layers[ki];
    const Tensor& x = trace.acts[ki];
    const TraceEntry& te = trace.extra[ki];
    const std::size_t n = x.shape[0];
    const bool at_input = ki == 0;
    switch (spec.kind) {
      case LayerKind::SoftmaxOutput:
      case LayerKind::Dense: {
        const Tensor& w = model.params[ki].tensors[0];
        const std::size_t d = w.shape[0], u = w.shape[1];
        Tensor dz = std::move(dy);
        if (spec.kind == LayerKind::Dense && spec.activation == Activation::Relu) {
          for (std::size_t i = 0; i < dz.size(); ++i)
            if (te.z.values[i] <= 0.0) dz.values[i] = 0.0;
        }
        if (param_grads) {
          Tensor& dw = (*param_grads)[ki].tensors[0];
          Tensor& db = (*param_grads)[ki].tensors[1];
          kernels::matmul_at_b_acc(x.data(), n, d, dz.data(), u, dw.values.data());
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < u; ++j)
              db.values[j] += dz.values[i * u + j];
        }
        if (at_input && !want_input) return Tensor({1}, {0.0});
        Tensor dx({n, d}, std::vector<double>(n * d));
        kernels::matmul_a_bt(dz.data(), n, u, w.data(), d, dx.values.data());
        dy = std::move(dx);
        break;
      }
      case LayerKind::Conv2D: {
        const Tensor& kern = model.params[ki].tensors[0];
        const std::size_t h = x.shape[1], w = x.shape[2], ci = x.shape[3];
        const std::size_t co = spec.units;
        Tensor dz = std::move(dy);
        if (spec.activation == Activation::Relu) {
          for (std::size_t i = 0; i < dz.size(); ++i)
            if (te.z.values[i] <= 0.0) dz.values[i] = 0.0;
        }
        if (param_grads) {
          Tensor& dk = (*param_grads)[ki].tensors[0];
          Tensor& db = (*param_grads)[ki].tensors[1];
          kernels::conv2d_backward_params(x.data(), n, h, w, ci, dz.data(), co,
                                          dk.values.data(), db.values.data());
        }
        if (at_input && !want_input) return Tensor({1}, {0.0});
        Tensor dx(x.shape, std::vector<double>(x.size()));
        kernels::conv2d_backward_input(dz.data(), n, h, w, co, kern.data(), ci,
                                       dx.values.data());
        dy = std::move(dx);
        break;
      }
      case LayerKind::MaxPool2D: {
        Tensor dx(x.shape, std::vector<double>(x.size(), 0.0));
        const std::size_t per_out = dy.size() / n;
        const std::size_t per_in = x.size() / n;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t o = 0; o < per_out; ++o)
            dx.values[i * per_in + te.winners[i * per_out + o]] +=
                dy.values[i * per_out + o];
        dy = std::move(dx);
        break;
      }
      case LayerKind::Dropout: {
        if (te.mask.size() > 0) {
          for (std::size_t i = 0; i < dy.size(); ++i)
            dy.values[i] *= te.mask.values[i];
        }
        break;
      }
      case LayerKind::Flatten:
      case LayerKind::Reshape: {
        dy.shape = x.shape;
        break;
      }
      case LayerKind::Lstm: {
        const Tensor& wx = model.params[ki].tensors[0];
        const Tensor& wh = model.params[ki].tensors[1];
        const std::size_t tlen = x.shape[1], d = x.shape[2], u = spec.units;
        const std::size_t g4 = 4 * u;
        Tensor dx(x.shape, std::vector<double>(x.size(), 0.0));
        std::vector<double> dh_next(n * u, 0.0), dc_next(n * u, 0.0);
        std::vector<double> dz(n * g4), xt(n * d), hprev(n * u), dxt(n * d);
        for (std::size_t t = tlen; t-- > 0;) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < u; ++j) {
              const std::size_t at = (i * tlen + t) * u + j;
              double dh = dh_next[i * u + j];
              if (spec.return_sequences)
                dh += dy.values[at];
              else if (t == tlen - 1)
                dh += dy.values[i * u + j];
              const double ov = te.go.values[at];
              const double tcv = te.tc.values[at];
              const double iv = te.gi.values[at];
              const double fv = te.gf.values[at];
              const double gv = te.gg.values[at];
              const double cp = t > 0 ? te.c.values[(i * tlen + t - 1) * u + j] : 0.0;
              const double dov = dh * tcv;
              const double dc = dh * ov * (1.0 - tcv * tcv) + dc_next[i * u + j];
              const double dfv = dc * cp;
              const double div = dc * gv;
              const double dgv = dc * iv;
              double* zr = dz.data() + i * g4;
              zr[j] = div * iv * (1.0 - iv);
              zr[u + j] = dfv * fv * (1.0 - fv);
              zr[2 * u + j] = dgv * (1.0 - gv * gv);
              zr[3 * u + j] = dov * ov * (1.0 - ov);
              dc_next[i * u + j] = dc * fv;
            }
          }
          for (std::size_t i = 0; i < n; ++i) {
            std::memcpy(xt.data() + i * d, x.data() + (i * tlen + t) * d,
                        d * sizeof(double));
            if (t > 0)
              std::memcpy(hprev.data() + i * u,
                          te.h.values.data() + (i * tlen + t - 1) * u,
                          u * sizeof(double));
            else
              std::memset(hprev.data() + i * u, 0, u * sizeof(double));
          }
          if (param_grads) {
            Tensor& dwx = (*param_grads)[ki].tensors[0];
            Tensor& dwh = (*param_grads)[ki].tensors[1];
            Tensor& db = (*param_grads)[ki].tensors[2];
            kernels::matmul_at_b_acc(xt.data(), n, d, dz.data(), g4,
                                     dwx.values.data());
            kernels::matmul_at_b_acc(hprev.data(), n, u, dz.data(), g4,
                                     dwh.values.data());
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < g4; ++j)
                db.values[j] += dz[i * g4 + j];
          }
          if (!at_input || want_input) {
            kernels::matmul_a_bt(dz.data(), n, g4, wx.data(), d, dxt.data());
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t p = 0; p < d; ++p)
                dx.values[(i * tlen + t) * d + p] = dxt[i * d + p];
          }
          kernels::matmul_a_bt(dz.data(), n, g4, wh.data(), u, dh_next.data());
        }
        dy = std::move(dx);
        break;
      }
    }
  }
  return dy;
}

std::vector<LayerParams> zero_like(const std::vector<LayerParams>& params) {
  std::vector<LayerParams> out(params.size());
  for (std::size_t k = 0; k < params.size(); ++k)
    for (const Tensor& t : params[k].tensors)
      out[k].tensors.push_back(Tensor(t.shape, std::vector<double>(t.size(), 0.0)));
  return out;
}

void bump_queries(const NeuralModel& model, std::uint64_t n) {
  if (model.gradient_queries) model.gradient_queries->fetch_add(n);
}

}  // namespace

NeuralModel init_model(std::vector<std::size_t> input_shape,
                       std::vector<LayerSpec> layers, std::uint64_t seed) {
  if (input_shape.empty() || layers.empty())
    throw std::invalid_argument("init_model: empty input shape or layer list");
  if (layers.back().kind != LayerKind::SoftmaxOutput)
    throw std::invalid_argument("init_model: final layer must be SoftmaxOutput");
  for (std::size_t k = 0; k + 1 < layers.size(); ++k)
    if (layers[k].kind == LayerKind::SoftmaxOutput)
      throw std::invalid_argument("init_model: SoftmaxOutput only allowed as final layer");

  NeuralModel model;
  model.input_shape = std::move(input_shape);
  model.layers = std::move(layers);
  model.params.resize(model.layers.size());

  std::vector<std::size_t> shape = model.input_shape;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const LayerSpec& spec = model.layers[k];
    Rng rng(derive_seed(seed, k));
    auto glorot = [&rng](std::vector<std::size_t> shp, std::size_t fan_in,
                         std::size_t fan_out) {
      const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
      std::vector<double> vals(shape_product(shp));
      for (double& v : vals) v = rng.uniform(-limit, limit);
      return Tensor(std::move(shp), std::move(vals));
    };
    switch (spec.kind) {
      case LayerKind::Dense:
      case LayerKind::SoftmaxOutput: {
        if (shape.size() != 1) {
          // Let layer_output_shape produce the diagnostic.
          layer_output_shape(spec, shape);
        }
        const std::size_t d = shape[0], u = spec.units;
        model.params[k].tensors.push_back(glorot({d, u}, d, u));
        model.params[k].tensors.push_back(Tensor({u}, std::vector<double>(u, 0.0)));
        break;
      }
      case LayerKind::Conv2D: {
        layer_output_shape(spec, shape);
        const std::size_t ci = shape[2], co = spec.units;
        model.params[k].tensors.push_back(glorot({3, 3, ci, co}, 9 * ci, 9 * co));
        model.params[k].tensors.push_back(Tensor({co}, std::vector<double>(co, 0.0)));
        break;
      }
      case LayerKind::Lstm: {
        layer_output_shape(spec, shape);
        const std::size_t d = shape[1], u = spec.units;
        model.params[k].tensors.push_back(glorot({d, 4 * u}, d, 4 * u));
        model.params[k].tensors.push_back(glorot({u, 4 * u}, u, 4 * u));
        std::vector<double> bias(4 * u, 0.0);
        for (std::size_t j = 0; j < u; ++j) bias[u + j] = 1.0;  // forget gate
        model.params[k].tensors.push_back(Tensor({4 * u}, std::move(bias)));
        break;
      }
      default:
        break;
    }
    shape = layer_output_shape(spec, shape);
  }
  return model;
}

std::vector<std::vector<std::size_t>> layer_output_shapes(const NeuralModel& model) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> shape = model.input_shape;
  for (const LayerSpec& spec : model.layers) {
    shape = layer_output_shape(spec, shape);
    out.push_back(shape);
  }
  return out;
}

std::size_t parameter_count(const NeuralModel& model) {
  std::size_t n = 0;
  for (const LayerParams& lp : model.params)
    for (const Tensor& t : lp.tensors) n += t.size();
  return n;
}

Tensor forward(const NeuralModel& model, const Tensor& batch, Mode mode, Rng* rng) {
  return run_forward(model, batch, mode, rng, nullptr);
}

double cross_entropy(const Tensor& probs, const Tensor& labels) {
  if (probs.shape != labels.shape || probs.rank() != 2)
    throw std::invalid_argument("cross_entropy: probs " + shape_string(probs.shape) +
                                " vs labels " + shape_string(labels.shape));
  const std::size_t n = probs.shape[0], c = probs.shape[1];
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, psum = 0.0, lsum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double p = probs.values[i * c + j];
      const double y = labels.values[i * c + j];
      psum += p;
      lsum += y;
      row -= y * std::log(std::max(p, 1e-12));
    }
    if (std::abs(psum - 1.0) > 1e-6)
      throw std::invalid_argument("cross_entropy: probability row does not sum to 1");
    if (std::abs(lsum - 1.0) > 1e-6)
      throw std::invalid_argument("cross_entropy: label row does not sum to 1");
    total += row;
  }
  const double loss = total / double(n);
  if (!std::isfinite(loss))
    throw std::runtime_error("cross_entropy: non-finite loss");
  return loss;
}

LossGradients loss_gradients(const NeuralModel& model, const Tensor& batch,
                             const Tensor& labels, Mode mode, Rng* rng) {
  ForwardTrace trace;
  Tensor probs = run_forward(model, batch, mode, rng, &trace);
  const std::size_t n = probs.shape[0], c = probs.shape[1];
  if (labels.shape != probs.shape)
    throw std::invalid_argument("loss_gradients: labels " + shape_string(labels.shape) +
                                " vs probs " + shape_string(probs.shape));
  LossGradients out;
  out.loss = cross_entropy(probs, labels);
  // d(mean CE)/d(logits) through softmax at temperature T.
  Tensor dlogits({n, c}, std::vector<double>(n * c));
  const double scale = 1.0 / (double(n) * model.temperature);
  for (std::size_t i = 0; i < n * c; ++i)
    dlogits.values[i] = (probs.values[i] - labels.values[i]) * scale;
  out.param_grads = zero_like(model.params);
  backprop(model, trace, dlogits, &out.param_grads, false);
  for (const LayerParams& lp : out.param_grads)
    for (const Tensor& t : lp.tensors) ensure_finite(t, "parameter gradient");
  out.probs = std::move(probs);
  return out;
}

Tensor input_gradient(const NeuralModel& model, const Tensor& batch,
                      const Tensor& labels) {
  ForwardTrace trace;
  Tensor probs = run_forward(model, batch, Mode::Infer, nullptr, &trace);
  const std::size_t n = probs.shape[0], c = probs.shape[1];
  if (labels.shape != probs.shape)
    throw std::invalid_argument("input_gradient: labels " + shape_string(labels.shape) +
                                " vs probs " + shape_string(probs.shape));
  bump_queries(model, n);
  // Each row carries the gradient of its own (unaveraged) loss.
  Tensor dlogits({n, c}, std::vector<double>(n * c));
  for (std::size_t i = 0; i < n * c; ++i)
    dlogits.values[i] = (probs.values[i] - labels.values[i]) / model.temperature;
  Tensor g = backprop(model, trace, dlogits, nullptr, true);
  g.shape = batch.shape;
  ensure_finite(g, "input gradient");
  return g;
}

Tensor prob_input_gradient(const NeuralModel& model, const Tensor& batch,
                           std::size_t class_index) {
  ForwardTrace trace;
  Tensor probs = run_forward(model, batch, Mode::Infer, nullptr, &trace);
  const std::size_t n = probs.shape[0], c = probs.shape[1];
  if (class_index >= c)
    throw std::invalid_argument("prob_input_gradient: class index out of range");
  bump_queries(model, n);
  Tensor dlogits({n, c}, std::vector<double>(n * c));
  for (std::size_t i = 0; i < n; ++i) {
    const double pk = probs.values[i * c + class_index];
    for (std::size_t j = 0; j < c; ++j) {
      const double d = j == class_index ? 1.0 : 0.0;
      dlogits.values[i * c + j] =
          pk * (d - probs.values[i * c + j]) / model.temperature;
    }
  }
  Tensor g = backprop(model, trace, dlogits, nullptr, true);
  g.shape = batch.shape;
  ensure_finite(g, "probability input gradient");
  return g;
}

MarginGradient margin_and_gradient(const NeuralModel& model, const Tensor& input) {
  ForwardTrace trace;
  Tensor probs = run_forward(model, input, Mode::Infer, nullptr, &trace);
  const std::size_t n = probs.shape[0], c = probs.shape[1];
  if (n != 1 || c != 2)
    throw std::invalid_argument("margin_and_gradient: expects one sample and 2 classes");
  bump_queries(model, 1);
  const double p0 = probs.values[0], p1 = probs.values[1];
  // d(p1 - p0)/d(logits) via the softmax Jacobian at temperature T.
  Tensor dlogits({1, 2}, std::vector<double>(2));
  for (std::size_t j = 0; j < 2; ++j) {
    const double d1 = j == 1 ? 1.0 : 0.0;
    const double d0 = j == 0 ? 1.0 : 0.0;
    dlogits.values[j] = (p1 * (d1 - probs.values[j]) - p0 * (d0 - probs.values[j])) /
                        model.temperature;
  }
  MarginGradient out;
  out.margin = p1 - p0;
  out.grad = backprop(model, trace, dlogits, nullptr, true);
  out.grad.shape = input.shape;
  ensure_finite(out.grad, "margin gradient");
  return out;
}

Tensor finite_diff_gradient(const NeuralModel& model, const Tensor& input,
                            const Tensor& label, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be > 0");
  Tensor probe = input;
  Tensor grad(input.shape, std::vector<double>(input.size(), 0.0));
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double orig = probe.values[i];
    probe.values[i] = orig + h;
    const double lp = cross_entropy(forward(model, probe), label);
    probe.values[i] = orig - h;
    const double lm = cross_entropy(forward(model, probe), label);
    probe.values[i] = orig;
    grad.values[i] = (lp - lm) / (2.0 * h);
  }
  return grad;
}

double kink_margin(const NeuralModel& model, const Tensor& input) {
  ForwardTrace trace;
  run_forward(model, input, Mode::Infer, nullptr, &trace);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const LayerSpec& spec = model.layers[k];
    const TraceEntry& te = trace.extra[k];
    if ((spec.kind == LayerKind::Dense || spec.kind == LayerKind::Conv2D) &&
        spec.activation == Activation::Relu) {
      // z exactly 0.0 means every input to the unit is dead (zero-bias
      // plateau), which a small probe cannot move off.
      for (double z : te.z.values)
        if (z != 0.0) margin = std::min(margin, std::abs(z));
    } else if (spec.kind == LayerKind::MaxPool2D) {
      const Tensor& x = trace.acts[k];
      const std::size_t n = x.shape[0], hh = x.shape[1], ww = x.shape[2], c = x.shape[3];
      for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.data() + i * hh * ww * c;
        for (std::size_t r = 0; r + 1 < hh; r += 2)
          for (std::size_t cc = 0; cc + 1 < ww; cc += 2)
            for (std::size_t ch = 0; ch < c; ++ch) {
              double v[4] = {xi[(r * ww + cc) * c + ch],
                             xi[(r * ww + cc + 1) * c + ch],
                             xi[((r + 1) * ww + cc) * c + ch],
                             xi[((r + 1) * ww + cc + 1) * c + ch]};
              std::sort(v, v + 4);
              if (v[3] != 0.0) margin = std::min(margin, v[3] - v[2]);
            }
      }
    }
  }
  return margin;
}

}  // namespace etd
