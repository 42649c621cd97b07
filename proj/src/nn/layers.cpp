#include "gaswarm/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace gaswarm::nn {

Parameter& ParameterStore::add(std::string name, std::vector<int> shape) {
  if (find(name)) throw std::invalid_argument("duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->value = Tensor(shape);
  p->grad = Tensor(std::move(shape));
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParameterStore::find(const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

const Parameter* ParameterStore::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad.fill(0.0);
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

std::string ParameterStore::describe() const {
  std::string s;
  for (const auto& p : params_) s += p->name + p->value.shape_string() + ";";
  return s;
}

Tensor Tape::pop() {
  if (saved_.empty()) throw std::logic_error("backward pass popped an empty tape");
  Tensor t = std::move(saved_.back());
  saved_.pop_back();
  return t;
}

void init_fan_in(Tensor& w, int fan_in, data::RandomSource& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, fan_in)));
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
}

Conv1dLayer::Conv1dLayer(ParameterStore& store, const std::string& name, int cin, int cout,
                         int kernel, Padding pad, data::RandomSource& rng)
    : w_(&store.add(name + ".w", {cout, cin, kernel})),
      b_(&store.add(name + ".b", {cout})),
      pad_(pad) {
  init_fan_in(w_->value, cin * kernel, rng);
}

Tensor Conv1dLayer::forward(const Tensor& x, Tape* tape) const {
  Tensor y = conv1d(x, w_->value, b_->value, pad_);
  if (tape) tape->push(x);
  return y;
}

Tensor Conv1dLayer::backward(const Tensor& dy, Tape& tape) const {
  const Tensor x = tape.pop();
  return conv1d_backward(x, w_->value, dy, pad_, w_->grad, b_->grad);
}

MergeLayer::MergeLayer(ParameterStore& store, const std::string& name, int channels, int cout,
                       int kernel, data::RandomSource& rng)
    : w_(&store.add(name + ".w", {cout, channels, 2, kernel})), b_(&store.add(name + ".b", {cout})) {
  init_fan_in(w_->value, 2 * channels * kernel, rng);
}

Tensor MergeLayer::forward(const Tensor& a, const Tensor& b, Tape* tape) const {
  Tensor y = merge_streams(a, b, w_->value, b_->value);
  if (tape) {
    tape->push(a);
    tape->push(b);
  }
  return y;
}

std::pair<Tensor, Tensor> MergeLayer::backward(const Tensor& dy, Tape& tape) const {
  const Tensor b = tape.pop();
  const Tensor a = tape.pop();
  return merge_streams_backward(a, b, w_->value, dy, w_->grad, b_->grad);
}

InceptionBlock::InceptionBlock(ParameterStore& store, const std::string& name, int channels,
                               const std::vector<int>& kernels, int width,
                               data::RandomSource& rng)
    : width_(width) {
  if (kernels.empty() || width < 1) throw ShapeMismatch("inception block needs branches");
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const std::string bn = name + ".b" + std::to_string(i);
    Branch br{kernels[i], Conv1dLayer(store, bn + ".reduce", channels, width, 1, Padding::Same, rng),
              nullptr};
    if (kernels[i] > 1)
      br.conv = std::make_unique<Conv1dLayer>(store, bn + ".conv", width, width, kernels[i],
                                              Padding::Same, rng);
    branches_.push_back(std::move(br));
  }
  project_ = std::make_unique<Conv1dLayer>(store, name + ".project",
                                           width * static_cast<int>(kernels.size()), channels, 1,
                                           Padding::Same, rng);
}

Tensor InceptionBlock::forward(const Tensor& x, Tape* tape) const {
  if (tape) tape->push(x);
  const Tensor r = relu(x);
  std::vector<Tensor> outs;
  outs.reserve(branches_.size());
  for (const Branch& br : branches_) {
    Tensor h = br.reduce.forward(r, tape);
    if (br.conv) {
      Tensor a = relu(h);
      if (tape) tape->push(std::move(h));
      h = br.conv->forward(a, tape);
    }
    outs.push_back(std::move(h));
  }
  std::vector<const Tensor*> parts;
  for (const Tensor& o : outs) parts.push_back(&o);
  Tensor y = project_->forward(concat_channels(parts), tape);
  if (y.shape() != x.shape()) throw ShapeMismatch("inception block changed the shape");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
  return y;
}

Tensor InceptionBlock::backward(const Tensor& dy, Tape& tape) const {
  const Tensor dcat = project_->backward(dy, tape);
  Tensor dr;
  for (std::size_t i = branches_.size(); i-- > 0;) {
    const Branch& br = branches_[i];
    Tensor d = slice_channels(dcat, static_cast<int>(i) * width_, width_);
    if (br.conv) {
      d = br.conv->backward(d, tape);
      const Tensor h = tape.pop();
      d = relu_backward(h, d);
    }
    d = br.reduce.backward(d, tape);
    if (dr.size() == 0) {
      dr = std::move(d);
    } else {
      for (std::size_t k = 0; k < dr.size(); ++k) dr[k] += d[k];
    }
  }
  const Tensor x = tape.pop();
  Tensor dx = relu_backward(x, dr);
  for (std::size_t k = 0; k < dx.size(); ++k) dx[k] += dy[k];
  return dx;
}

GeneratorHead::GeneratorHead(ParameterStore& store, const std::string& name, int channels,
                             int modes, data::RandomSource& rng)
    : conv_(store, name + ".logits", channels, modes, 1, Padding::Same, rng) {}

Tensor GeneratorHead::forward(const Tensor& x, double temperature, Tape* tape) const {
  if (tape) tape->push(x);
  Tensor y = softmax_channels(conv_.forward(relu(x), tape), temperature);
  if (tape) tape->push(y);
  return y;
}

Tensor GeneratorHead::backward(const Tensor& dy, double temperature, Tape& tape) const {
  const Tensor y = tape.pop();
  const Tensor dz = softmax_channels_backward(y, dy, temperature);
  const Tensor da = conv_.backward(dz, tape);
  const Tensor x = tape.pop();
  return relu_backward(x, da);
}

DiscriminatorHead::DiscriminatorHead(ParameterStore& store, const std::string& name, int channels,
                                     data::RandomSource& rng)
    : conv_(store, name + ".score", channels, 1, 1, Padding::Same, rng) {}

Tensor DiscriminatorHead::forward(const Tensor& x, double beta, Tape* tape) const {
  if (tape) tape->push(x);
  const Tensor s = conv_.forward(relu(x), tape);
  const int n = s.dim(0), len = s.dim(2);
  Tensor m({n});
  for (int b = 0; b < n; ++b) {
    double sum = 0.0;
    for (int t = 0; t < len; ++t) sum += s.at(b, 0, t);
    m[b] = sum / len;
  }
  Tensor y = softplus(m, beta);
  if (tape) {
    tape->push(m);
    tape->push(Tensor({len}));  // remembers the time length
  }
  return y;
}

Tensor DiscriminatorHead::backward(const Tensor& dy, double beta, Tape& tape) const {
  const int len = tape.pop().dim(0);
  const Tensor m = tape.pop();
  if (dy.shape() != m.shape()) throw ShapeMismatch("discriminator head gradient shape");
  const Tensor dm = softplus_backward(m, dy, beta);
  const int n = m.dim(0);
  Tensor ds({n, 1, len});
  for (int b = 0; b < n; ++b)
    for (int t = 0; t < len; ++t) ds.at(b, 0, t) = dm[b] / len;
  const Tensor da = conv_.backward(ds, tape);
  const Tensor x = tape.pop();
  return relu_backward(x, da);
}

}  // namespace gaswarm::nn
