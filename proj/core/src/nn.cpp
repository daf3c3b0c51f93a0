#include "rrm/nn.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rrm {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

std::size_t parameter_count(const MlpShape& s) {
  std::size_t n = 0;
  int in = s.inputs;
  for (int l = 0; l < s.hidden_layers; ++l) {
    n += static_cast<std::size_t>(in) * s.hidden + s.hidden;
    in = s.hidden;
  }
  n += static_cast<std::size_t>(in) * s.outputs + s.outputs;
  return n;
}

Mlp::Mlp(MlpShape shape) : shape_(shape) {
  if (shape_.inputs < 1 || shape_.outputs < 1 || shape_.hidden_layers < 0 ||
      (shape_.hidden_layers > 0 && shape_.hidden < 1))
    throw std::invalid_argument("Mlp: invalid shape");
  offsets_.resize(num_layers());
  std::size_t off = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_[l] = off;
    off += static_cast<std::size_t>(layer_inputs(l)) * layer_outputs(l) + layer_outputs(l);
  }
  params_.assign(off, 0.0);
}

Mlp::Mlp(MlpShape shape, Rng& rng) : Mlp(shape) {
  for (int l = 0; l < num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / (layer_inputs(l) + layer_outputs(l)));
    std::uniform_real_distribution<double> u(-limit, limit);
    const std::size_t count = static_cast<std::size_t>(layer_inputs(l)) * layer_outputs(l);
    for (std::size_t p = 0; p < count; ++p) params_[offsets_[l] + p] = u(rng);
  }
}

int Mlp::layer_inputs(int layer) const { return layer == 0 ? shape_.inputs : shape_.hidden; }
int Mlp::layer_outputs(int layer) const {
  return layer == num_layers() - 1 ? shape_.outputs : shape_.hidden;
}

Eigen::Map<const Mlp::RowMat> Mlp::weights(int layer) const {
  return {params_.data() + weight_offset(layer), layer_outputs(layer), layer_inputs(layer)};
}
Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), layer_outputs(layer)};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& batch) const {
  MlpCache scratch;
  return forward(batch, scratch);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& batch, MlpCache& cache) const {
  if (batch.rows() != shape_.inputs)
    throw ShapeMismatch("Mlp::forward: expected " + std::to_string(shape_.inputs) +
                        " inputs, got " + std::to_string(batch.rows()));
  cache.input = batch;
  cache.activated.resize(shape_.hidden_layers);
  const Eigen::MatrixXd* a = &cache.input;
  for (int l = 0; l < shape_.hidden_layers; ++l) {
    Eigen::MatrixXd z = weights(l) * (*a);
    z.colwise() += bias(l);
    if (shape_.activation == Activation::Tanh) z = z.array().tanh().matrix();
    cache.activated[l] = std::move(z);
    a = &cache.activated[l];
  }
  const int last = num_layers() - 1;
  cache.output = weights(last) * (*a);
  cache.output.colwise() += bias(last);
  return cache.output;
}

Eigen::VectorXd Mlp::forward_one(std::span<const double> input) const {
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  return forward(x).col(0);
}

std::vector<double> Mlp::backward(const MlpCache& cache, const Eigen::MatrixXd& output_grad) const {
  if (output_grad.rows() != shape_.outputs || output_grad.cols() != cache.output.cols())
    throw ShapeMismatch("Mlp::backward: output gradient shape differs from the cached output");
  std::vector<double> grads(params_.size(), 0.0);
  const double batch = static_cast<double>(output_grad.cols());
  Eigen::MatrixXd delta = output_grad / batch;

  for (int l = num_layers() - 1; l >= 0; --l) {
    const Eigen::MatrixXd& in = l == 0 ? cache.input : cache.activated[l - 1];
    Eigen::Map<RowMat>(grads.data() + weight_offset(l), layer_outputs(l), layer_inputs(l)) =
        delta * in.transpose();
    Eigen::Map<Eigen::VectorXd>(grads.data() + bias_offset(l), layer_outputs(l)) =
        delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = weights(l).transpose() * delta;
    if (shape_.activation == Activation::Tanh)
      back.array() *= 1.0 - cache.activated[l - 1].array().square();
    delta = std::move(back);
  }
  return grads;
}

double AdamState::learning_rate_at(const AdamConfig& cfg, long step) {
  if (cfg.decay_every <= 0) return cfg.learning_rate;
  return cfg.learning_rate * std::pow(cfg.decay_factor, static_cast<double>(step / cfg.decay_every));
}

void adam_update(Mlp& net, std::span<const double> grads, AdamState& state) {
  auto params = net.parameters();
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw ShapeMismatch("adam_update: gradient/moment sizes differ from the parameters");
  const auto& c = state.config;
  const double lr = state.learning_rate();
  const long t = state.step + 1;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double g = grads[p] + c.l2 * params[p];
    state.m[p] = c.beta1 * state.m[p] + (1.0 - c.beta1) * g;
    state.v[p] = c.beta2 * state.v[p] + (1.0 - c.beta2) * g * g;
    params[p] -= lr * (state.m[p] / bc1) / (std::sqrt(state.v[p] / bc2) + c.epsilon);
  }
  state.step = t;
}

namespace {

constexpr char kMagic[8] = {'R', 'R', 'M', 'C', 'K', 'P', 'T', '1'};

nlohmann::json shape_json(const MlpShape& s) {
  return {{"inputs", s.inputs},
          {"hidden", s.hidden},
          {"hidden_layers", s.hidden_layers},
          {"outputs", s.outputs},
          {"activation", s.activation == Activation::Tanh ? "tanh" : "identity"}};
}

}  // namespace

void save_checkpoint(const Mlp& net, long adam_step, const AdamConfig& adam,
                     const std::string& path) {
  const nlohmann::json header = {
      {"format", "rrm-mlp"},
      {"shape", shape_json(net.shape())},
      {"num_parameters", net.num_parameters()},
      {"adam_step", adam_step},
      {"schedule",
       {{"learning_rate", adam.learning_rate},
        {"decay_every", adam.decay_every},
        {"decay_factor", adam.decay_factor},
        {"current_learning_rate", AdamState::learning_rate_at(adam, adam_step)}}},
      {"adam", {{"beta1", adam.beta1}, {"beta2", adam.beta2}, {"epsilon", adam.epsilon}, {"l2", adam.l2}}}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto params = net.parameters();
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path + " is not an rrm checkpoint");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  const auto header = nlohmann::json::parse(text);

  const auto& js = header.at("shape");
  MlpShape shape;
  shape.inputs = js.at("inputs");
  shape.hidden = js.at("hidden");
  shape.hidden_layers = js.at("hidden_layers");
  shape.outputs = js.at("outputs");
  shape.activation = js.at("activation") == "tanh" ? Activation::Tanh : Activation::Identity;

  Checkpoint ck;
  ck.net = Mlp(shape);
  if (header.at("num_parameters").get<std::size_t>() != ck.net.num_parameters())
    throw ShapeMismatch("checkpoint parameter count does not match its shape");
  auto params = ck.net.parameters();
  in.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated checkpoint " + path);
  ck.adam_step = header.value("adam_step", 0L);
  const auto& sched = header.at("schedule");
  ck.adam.learning_rate = sched.at("learning_rate");
  ck.adam.decay_every = sched.at("decay_every");
  ck.adam.decay_factor = sched.at("decay_factor");
  if (header.contains("adam")) {
    const auto& a = header.at("adam");
    ck.adam.beta1 = a.value("beta1", ck.adam.beta1);
    ck.adam.beta2 = a.value("beta2", ck.adam.beta2);
    ck.adam.epsilon = a.value("epsilon", ck.adam.epsilon);
    ck.adam.l2 = a.value("l2", ck.adam.l2);
  }
  return ck;
}

}  // namespace rrm
