#include "taskspec/policy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace taskspec {

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("an MLP needs at least two layers");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    num_params_ += sizes_[l + 1] * (sizes_[l] + 1);
  }
}

void Mlp::init(std::span<double> params, Rng& rng) const {
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    const bool last = l + 2 == sizes_.size();
    for (std::size_t i = 0; i < in * out; ++i) params[at++] = last ? 0.0 : dist(rng);
    for (std::size_t i = 0; i < out; ++i) params[at++] = 0.0;
  }
}

void Mlp::forward(std::span<const double> params, std::span<const double> input,
                  std::span<double> output) const {
  thread_local std::vector<double> a;
  thread_local std::vector<double> b;
  a.assign(input.begin(), input.end());
  const double* w = params.data();
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double* bias = w + in * out;
    const bool last = l + 2 == sizes_.size();
    b.resize(out);
    for (std::size_t o = 0; o < out; ++o) {
      double sum = bias[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) sum += row[i] * a[i];
      b[o] = last ? std::tanh(sum) : std::max(sum, 0.0);
    }
    w = bias + out;
    std::swap(a, b);
  }
  std::copy(a.begin(), a.end(), output.begin());
}

PolicyModuleSet PolicyModuleSet::per_state(const TaskMonitor& monitor, const Environment& env,
                                           const PolicyOptions& options) {
  PolicyModuleSet set;
  set.kind_ = Kind::kPerState;
  set.state_dim_ = env.state_dim();
  set.action_dim_ = env.action_dim();
  set.num_registers_ = monitor.num_registers();
  set.register_clip_ = options.register_clip;
  set.fingerprint_ = fingerprint(monitor);
  for (std::size_t q = 0; q < monitor.num_states; ++q) {
    std::vector<std::size_t> sizes{set.state_dim_ + set.num_registers_};
    sizes.insert(sizes.end(), options.hidden.begin(), options.hidden.end());
    sizes.push_back(set.action_dim_ + monitor.exits(q).size());
    set.modules_.emplace_back(std::move(sizes));
  }
  set.layout();
  for (std::size_t q = 0; q < monitor.num_states; ++q) {
    set.exits_.push_back(monitor.exits(q));
    const auto self = monitor.self_loop(q);
    if (!self) throw InvalidMonitor(fmt::format("state {} has no self loop", q));
    set.self_loops_.push_back(*self);
  }
  return set;
}

PolicyModuleSet PolicyModuleSet::single(const TaskMonitor& monitor, const Environment& env,
                                        const PolicyOptions& options) {
  PolicyModuleSet set;
  set.kind_ = Kind::kSingle;
  set.state_dim_ = env.state_dim();
  set.action_dim_ = env.action_dim();
  set.num_registers_ = monitor.num_registers();
  set.register_clip_ = options.register_clip;
  set.fingerprint_ = fingerprint(monitor);
  std::vector<std::size_t> sizes{set.state_dim_};
  sizes.insert(sizes.end(), options.hidden.begin(), options.hidden.end());
  sizes.push_back(set.action_dim_);
  set.modules_.emplace_back(std::move(sizes));
  set.layout();
  for (std::size_t q = 0; q < monitor.num_states; ++q) {
    set.exits_.push_back({});
    const auto self = monitor.self_loop(q);
    if (!self) throw InvalidMonitor(fmt::format("state {} has no self loop", q));
    set.self_loops_.push_back(*self);
  }
  return set;
}

void PolicyModuleSet::layout() {
  offsets_.clear();
  std::size_t total = 0;
  for (const auto& m : modules_) {
    offsets_.push_back(total);
    total += m.num_params();
  }
  params_.assign(total, 0.0);
}

void PolicyModuleSet::randomize(Rng& rng) {
  for (std::size_t i = 0; i < modules_.size(); ++i) {
    modules_[i].init(std::span<double>(params_).subspan(offsets_[i], modules_[i].num_params()),
                     rng);
  }
}

AugmentedAction PolicyModuleSet::act(const AugmentedState& state, const TaskMonitor& monitor,
                                     std::span<const double> params) const {
  const std::size_t q = state.monitor_state;
  const std::size_t index = kind_ == Kind::kSingle ? 0 : q;
  const Mlp& net = modules_[index];

  thread_local std::vector<double> input;
  thread_local std::vector<double> output;
  input.assign(state.env.begin(), state.env.end());
  if (kind_ == Kind::kPerState) {
    for (double v : state.registers) {
      input.push_back(std::clamp(v, -register_clip_, register_clip_));
    }
  }
  output.resize(net.output_size());
  net.forward(params.subspan(offsets_[index], net.num_params()), input, output);

  AugmentedAction action;
  action.env.assign(output.begin(), output.begin() + static_cast<std::ptrdiff_t>(action_dim_));
  action.transition = self_loops_[q];
  double best = 0.0;
  const auto& exits = exits_[q];
  for (std::size_t j = 0; j < exits.size(); ++j) {
    const double score = output[action_dim_ + j];
    if (score <= best) continue;
    const auto& t = monitor.transitions[exits[j]];
    if (!t.guard.eval(state.env, state.registers)) continue;
    best = score;
    action.transition = exits[j];
  }
  return action;
}

namespace {

constexpr const char* kMagic = "taskspec-policy";
constexpr int kVersion = 1;

template <typename T>
T read_field(std::istream& in, const char* expected_key) {
  std::string key;
  T value{};
  if (!(in >> key) || key != expected_key || !(in >> value)) {
    throw CheckpointError(fmt::format("checkpoint: expected '{}'", expected_key));
  }
  return value;
}

}  // namespace

void PolicyModuleSet::save(std::ostream& out) const {
  out << kMagic << ' ' << kVersion << '\n';
  out << fmt::format("fingerprint {:016x}\n", fingerprint_);
  out << "kind " << (kind_ == Kind::kSingle ? "single" : "per_state") << '\n';
  out << "state_dim " << state_dim_ << '\n';
  out << "action_dim " << action_dim_ << '\n';
  out << "registers " << num_registers_ << '\n';
  out << fmt::format("register_clip {}\n", register_clip_);
  out << "modules " << modules_.size() << '\n';
  for (const auto& m : modules_) {
    out << "layers " << m.layer_sizes().size();
    for (auto s : m.layer_sizes()) out << ' ' << s;
    out << '\n';
  }
  out << "params " << params_.size() << '\n';
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out << fmt::format("{}", params_[i]) << ((i + 1) % 8 == 0 ? '\n' : ' ');
  }
  out << '\n';
}

PolicyModuleSet PolicyModuleSet::load(std::istream& in, const TaskMonitor& monitor) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) {
    throw CheckpointError("checkpoint: not a policy checkpoint");
  }
  if (version != kVersion) {
    throw CheckpointError(fmt::format("checkpoint: unsupported version {}", version));
  }
  const auto fp_text = read_field<std::string>(in, "fingerprint");
  const std::uint64_t fp = std::stoull(fp_text, nullptr, 16);
  if (fp != fingerprint(monitor)) {
    throw CheckpointError(fmt::format(
        "checkpoint: monitor fingerprint {} does not match the compiled spec ({:016x})", fp_text,
        fingerprint(monitor)));
  }
  PolicyModuleSet set;
  set.fingerprint_ = fp;
  const auto kind = read_field<std::string>(in, "kind");
  if (kind != "single" && kind != "per_state") {
    throw CheckpointError(fmt::format("checkpoint: unknown kind '{}'", kind));
  }
  set.kind_ = kind == "single" ? Kind::kSingle : Kind::kPerState;
  set.state_dim_ = read_field<std::size_t>(in, "state_dim");
  set.action_dim_ = read_field<std::size_t>(in, "action_dim");
  set.num_registers_ = read_field<std::size_t>(in, "registers");
  set.register_clip_ = read_field<double>(in, "register_clip");
  if (set.num_registers_ != monitor.num_registers()) {
    throw CheckpointError("checkpoint: register count mismatch");
  }
  const auto modules = read_field<std::size_t>(in, "modules");
  const std::size_t expected_modules = set.kind_ == Kind::kSingle ? 1 : monitor.num_states;
  if (modules != expected_modules) throw CheckpointError("checkpoint: module count mismatch");
  for (std::size_t i = 0; i < modules; ++i) {
    const auto count = read_field<std::size_t>(in, "layers");
    if (count < 2 || count > 64) throw CheckpointError("checkpoint: bad layer count");
    std::vector<std::size_t> sizes(count);
    for (auto& s : sizes) {
      if (!(in >> s)) throw CheckpointError("checkpoint: truncated layer sizes");
    }
    set.modules_.emplace_back(std::move(sizes));
  }
  set.layout();
  const auto count = read_field<std::size_t>(in, "params");
  if (count != set.params_.size()) throw CheckpointError("checkpoint: parameter count mismatch");
  for (auto& p : set.params_) {
    std::string token;
    if (!(in >> token)) throw CheckpointError("checkpoint: truncated parameters");
    try {
      std::size_t used = 0;
      p = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw CheckpointError(fmt::format("checkpoint: bad parameter '{}'", token));
    }
  }
  for (std::size_t q = 0; q < monitor.num_states; ++q) {
    set.exits_.push_back(set.kind_ == Kind::kSingle ? std::vector<std::size_t>{}
                                                    : monitor.exits(q));
    const auto self = monitor.self_loop(q);
    if (!self) throw InvalidMonitor(fmt::format("state {} has no self loop", q));
    set.self_loops_.push_back(*self);
    if (set.kind_ == Kind::kPerState) {
      const auto& m = set.modules_[q];
      if (m.input_size() != set.state_dim_ + set.num_registers_ ||
          m.output_size() != set.action_dim_ + set.exits_[q].size()) {
        throw CheckpointError(fmt::format("checkpoint: module {} has the wrong shape", q));
      }
    }
  }
  return set;
}

}  // namespace taskspec
