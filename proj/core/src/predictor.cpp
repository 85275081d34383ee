#include "footcast/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "footcast/errors.hpp"
#include "footcast/io.hpp"
#include "footcast/rng.hpp"

namespace footcast {

MainInput make_main_input(const HeightScan& scan, const Command& cmd, double gait_phase) {
  MainInput in;
  for (int i = 0; i < kScanSize; ++i) in.values[i] = scan.values[static_cast<std::size_t>(i)];
  in.values[kScanSize + 0] = cmd.vx;
  in.values[kScanSize + 1] = cmd.vy;
  in.values[kScanSize + 2] = cmd.yaw_rate;
  in.values[kScanSize + 3] = gait_phase;
  return in;
}

UncertaintyInput make_uncertainty_input(const Command& cmd, const PooledDescriptor& pooled,
                                        bool include_command) {
  UncertaintyInput in;
  if (include_command) {
    in.values[0] = cmd.vx;
    in.values[1] = cmd.vy;
    in.values[2] = cmd.yaw_rate;
  }
  for (int i = 0; i < kPooledSize; ++i) in.values[3 + i] = pooled.values[static_cast<std::size_t>(i)];
  return in;
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::x: return "x";
    case Branch::u: return "u";
    case Branch::head: return "head";
  }
  return "head";
}

std::string_view to_string(Activation a) { return a == Activation::tanh ? "tanh" : "linear"; }

std::vector<int> Network::chain(Branch b) const {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(layers.size()); ++i)
    if (layers[static_cast<std::size_t>(i)].branch == b) idx.push_back(i);
  return idx;
}

void Network::validate() const {
  auto check_chain = [&](Branch b, int expected_in) -> int {
    const auto idx = chain(b);
    if (idx.empty()) throw StructuralError("network has no " + std::string(to_string(b)) + " layers");
    int width = expected_in;
    for (int i : idx) {
      const auto& l = layers[static_cast<std::size_t>(i)];
      if (expected_in >= 0 && l.inputs() != width)
        throw StructuralError("layer " + std::to_string(i) + " expects " + std::to_string(l.inputs()) +
                              " inputs, got " + std::to_string(width));
      if (l.bias.size() != l.outputs())
        throw StructuralError("layer " + std::to_string(i) + " bias size mismatch");
      if (!(l.dropout >= 0.0 && l.dropout < 1.0))
        throw StructuralError("layer " + std::to_string(i) + " dropout outside [0, 1)");
      width = l.outputs();
      expected_in = width;
    }
    return width;
  };
  const int xw = check_chain(Branch::x, kMainInputSize);
  const int uw = check_chain(Branch::u, kUncertaintyInputSize);
  const int out = check_chain(Branch::head, xw + uw);
  if (out != kOutputSize) throw StructuralError("head emits " + std::to_string(out) + " values, expected 12");
  // branches must be contiguous groups in x, u, head order
  int last = -1;
  for (const auto& l : layers) {
    const int tag = static_cast<int>(l.branch);
    if (tag < last) throw StructuralError("layers must be grouped x, u, head");
    last = tag;
  }
}

namespace {

Layer make_layer(Branch branch, Activation act, int in, int out, double dropout, rng::Stream& s) {
  Layer l;
  l.branch = branch;
  l.activation = act;
  l.dropout = dropout;
  l.weights.resize(out, in);
  l.bias = Eigen::VectorXd::Zero(out);
  const double limit = std::sqrt(6.0 / (in + out));
  for (int r = 0; r < out; ++r)
    for (int c = 0; c < in; ++c) l.weights(r, c) = s.uniform(-limit, limit);
  return l;
}

}  // namespace

Network init_network(const Architecture& arch, std::uint64_t seed) {
  if (arch.x_sizes.size() < 2 || arch.u_sizes.size() < 2)
    throw StructuralError("each branch needs at least one layer");
  if (arch.x_sizes.front() != kMainInputSize || arch.u_sizes.front() != kUncertaintyInputSize)
    throw StructuralError("branch input sizes must be 106 and 15");
  rng::Stream s(rng::key(seed, 0x496e6974));
  Network net;
  for (std::size_t i = 1; i < arch.x_sizes.size(); ++i)
    net.layers.push_back(make_layer(Branch::x, Activation::tanh, arch.x_sizes[i - 1], arch.x_sizes[i], 0.0, s));
  for (std::size_t i = 1; i < arch.u_sizes.size(); ++i)
    net.layers.push_back(
        make_layer(Branch::u, Activation::tanh, arch.u_sizes[i - 1], arch.u_sizes[i], arch.u_dropout, s));
  int width = arch.x_sizes.back() + arch.u_sizes.back();
  for (int h : arch.head_hidden) {
    net.layers.push_back(make_layer(Branch::head, Activation::tanh, width, h, 0.0, s));
    width = h;
  }
  net.layers.push_back(make_layer(Branch::head, Activation::linear, width, kOutputSize, 0.0, s));
  net.validate();
  return net;
}

Ensemble init_ensemble(const Architecture& arch, int members, std::uint64_t seed) {
  if (members < 1) throw StructuralError("ensemble needs at least one member");
  Ensemble e;
  for (int k = 0; k < members; ++k) e.push_back(init_network(arch, rng::key(seed, 0x4d656d, k)));
  return e;
}

DropoutMask sample_mask(const Network& net, std::uint64_t seed, int member, int sample) {
  DropoutMask mask;
  mask.layers.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    if (l.dropout <= 0.0) continue;
    const double keep_scale = 1.0 / (1.0 - l.dropout);
    Eigen::VectorXd m(l.outputs());
    for (int j = 0; j < l.outputs(); ++j)
      m[j] = rng::uniform01(rng::key(seed, 0x44726f70, member, sample, i, j)) < l.dropout ? 0.0 : keep_scale;
    mask.layers[i] = std::move(m);
  }
  return mask;
}

namespace detail {

MaskMatrices to_mask_matrices(const DropoutMask& mask) {
  MaskMatrices out(mask.layers.size());
  for (std::size_t i = 0; i < mask.layers.size(); ++i)
    if (mask.layers[i].size() > 0) out[i] = mask.layers[i];
  return out;
}

namespace {

const Eigen::MatrixXd* mask_for(const MaskMatrices* masks, int layer) {
  if (!masks || static_cast<std::size_t>(layer) >= masks->size()) return nullptr;
  const auto& m = (*masks)[static_cast<std::size_t>(layer)];
  return m.size() > 0 ? &m : nullptr;
}

void apply_mask(Eigen::MatrixXd& values, const Eigen::MatrixXd& mask) {
  if (mask.cols() == 1) {
    values.array().colwise() *= mask.col(0).array();
  } else {
    if (mask.cols() != values.cols() || mask.rows() != values.rows())
      throw StructuralError("dropout mask shape mismatch");
    values.array() *= mask.array();
  }
}

}  // namespace

Eigen::MatrixXd run_chain(const Network& net, Branch branch, const Eigen::MatrixXd& input,
                          const MaskMatrices* masks, ChainCache* cache) {
  Eigen::MatrixXd a = input;
  const auto idx = net.chain(branch);
  if (cache) {
    cache->inputs.assign(net.layers.size(), {});
    cache->activated.assign(net.layers.size(), {});
  }
  for (int i : idx) {
    const auto& l = net.layers[static_cast<std::size_t>(i)];
    if (a.rows() != l.inputs())
      throw StructuralError("layer " + std::to_string(i) + " expects " + std::to_string(l.inputs()) +
                            " inputs, got " + std::to_string(a.rows()));
    Eigen::MatrixXd z(l.outputs(), a.cols());
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      z.col(c).noalias() = l.weights * a.col(c);
      z.col(c) += l.bias;
    }
    if (l.activation == Activation::tanh) z = z.array().tanh().matrix();
    if (cache) {
      cache->inputs[static_cast<std::size_t>(i)] = a;
      cache->activated[static_cast<std::size_t>(i)] = z;
    }
    if (const auto* m = mask_for(masks, i)) apply_mask(z, *m);
    a = std::move(z);
  }
  return a;
}

NetworkGradient NetworkGradient::zeros_like(const Network& net) {
  NetworkGradient g;
  for (const auto& l : net.layers)
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  return g;
}

Eigen::MatrixXd backprop_chain(const Network& net, Branch branch, const ChainCache& cache,
                               const MaskMatrices* masks, const Eigen::MatrixXd& grad_output,
                               NetworkGradient& grad) {
  Eigen::MatrixXd g = grad_output;
  auto idx = net.chain(branch);
  std::reverse(idx.begin(), idx.end());
  for (int i : idx) {
    const auto& l = net.layers[static_cast<std::size_t>(i)];
    const auto& h = cache.activated[static_cast<std::size_t>(i)];
    const auto& a = cache.inputs[static_cast<std::size_t>(i)];
    if (const auto* m = mask_for(masks, i)) apply_mask(g, *m);
    if (l.activation == Activation::tanh) g.array() *= (1.0 - h.array().square());
    auto& lg = grad.layers[static_cast<std::size_t>(i)];
    lg.weights.noalias() += g * a.transpose();
    lg.bias += g.rowwise().sum();
    g = (l.weights.transpose() * g).eval();
  }
  return g;
}

}  // namespace detail

namespace {

Output12 forward_impl(const Network& net, const MainInput& x, const UncertaintyInput& u,
                      const detail::MaskMatrices* masks) {
  const Eigen::MatrixXd hx = detail::run_chain(net, Branch::x, x.values, masks, nullptr);
  const Eigen::MatrixXd hu = detail::run_chain(net, Branch::u, u.values, masks, nullptr);
  Eigen::MatrixXd h(hx.rows() + hu.rows(), 1);
  h << hx, hu;
  const Eigen::MatrixXd out = detail::run_chain(net, Branch::head, h, masks, nullptr);
  if (out.rows() != kOutputSize) throw StructuralError("network output is not 12-dimensional");
  return out.col(0);
}

}  // namespace

Output12 forward(const Network& net, const MainInput& x, const UncertaintyInput& u) {
  return forward_impl(net, x, u, nullptr);
}

Output12 forward(const Network& net, const MainInput& x, const UncertaintyInput& u, const DropoutMask& mask) {
  if (mask.layers.size() != net.layers.size()) throw StructuralError("dropout mask has wrong layer count");
  const auto masks = detail::to_mask_matrices(mask);
  return forward_impl(net, x, u, &masks);
}

EpistemicPrediction summarize_passes(const Eigen::Matrix<double, kOutputSize, Eigen::Dynamic>& passes) {
  const Eigen::Index n = passes.cols();
  if (n < 2) throw InsufficientSamplesError("variance needs at least 2 stochastic passes, got " + std::to_string(n));
  EpistemicPrediction p;
  Output12 sum = Output12::Zero();
  for (Eigen::Index c = 0; c < n; ++c) sum += passes.col(c);
  p.mean = sum / static_cast<double>(n);
  Output12 sq = Output12::Zero();
  for (Eigen::Index c = 0; c < n; ++c) sq += (passes.col(c) - p.mean).cwiseAbs2();
  p.raw_variance = sq / static_cast<double>(n - 1);
  p.variance = p.raw_variance.cwiseMax(kVarianceFloor).cwiseMin(kVarianceCeiling);
  p.scalar_summary = p.variance.mean();
  return p;
}

Eigen::Matrix<double, kOutputSize, Eigen::Dynamic> stochastic_passes(const Ensemble& ensemble,
                                                                     const MainInput& x,
                                                                     const UncertaintyInput& u,
                                                                     int samples_per_member,
                                                                     std::uint64_t seed) {
  if (ensemble.empty()) throw InsufficientSamplesError("ensemble is empty");
  if (samples_per_member < 1) throw InsufficientSamplesError("need at least one sample per member");
  const int m_count = samples_per_member;
  Eigen::Matrix<double, kOutputSize, Eigen::Dynamic> out(kOutputSize, static_cast<Eigen::Index>(ensemble.size()) * m_count);
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const auto& net = ensemble[k];
    detail::MaskMatrices masks(net.layers.size());
    for (int m = 0; m < m_count; ++m) {
      const auto mask = sample_mask(net, seed, static_cast<int>(k), m);
      for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (mask.layers[i].size() == 0) continue;
        if (masks[i].size() == 0) masks[i].resize(mask.layers[i].size(), m_count);
        masks[i].col(m) = mask.layers[i];
      }
    }
    bool x_dropout = false;
    for (int i : net.chain(Branch::x)) x_dropout = x_dropout || net.layers[static_cast<std::size_t>(i)].dropout > 0.0;
    // without dropout the x-branch output is shared by all of this member's passes
    const Eigen::MatrixXd hx =
        x_dropout ? detail::run_chain(net, Branch::x, x.values.replicate(1, m_count), &masks, nullptr)
                  : detail::run_chain(net, Branch::x, x.values, nullptr, nullptr).replicate(1, m_count);
    const Eigen::MatrixXd u_rep = u.values.replicate(1, m_count);
    const Eigen::MatrixXd hu = detail::run_chain(net, Branch::u, u_rep, &masks, nullptr);
    Eigen::MatrixXd h(hx.rows() + hu.rows(), m_count);
    h.topRows(hx.rows()) = hx;
    h.bottomRows(hu.rows()) = hu;
    const Eigen::MatrixXd y = detail::run_chain(net, Branch::head, h, &masks, nullptr);
    out.middleCols(static_cast<Eigen::Index>(k) * m_count, m_count) = y;
  }
  return out;
}

EpistemicPrediction predict(const Ensemble& ensemble, const MainInput& x, const UncertaintyInput& u,
                            int samples_per_member, std::uint64_t seed) {
  if (ensemble.empty()) throw InsufficientSamplesError("ensemble is empty");
  if (static_cast<long>(ensemble.size()) * samples_per_member < 2)
    throw InsufficientSamplesError("K*M must be at least 2");
  return summarize_passes(stochastic_passes(ensemble, x, u, samples_per_member, seed));
}

// ---------------------------------------------------------------------------
// Weight file

namespace {

constexpr std::string_view kMagic = "FOOTCAST-NET v1";

Branch parse_branch(std::string_view s) {
  if (s == "x") return Branch::x;
  if (s == "u") return Branch::u;
  if (s == "head") return Branch::head;
  throw LoadError("unknown branch tag '" + std::string(s) + "'");
}

Activation parse_activation(std::string_view s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  throw LoadError("unknown activation '" + std::string(s) + "'");
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::string_view next(const std::string& what) {
    if (pos_ >= text_.size()) throw LoadError("weight file truncated: missing " + what);
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    auto line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

int parse_int(std::string_view token, const std::string& field) {
  const double v = io::parse_double(token, field);
  if (v != std::floor(v) || v < 0) throw LoadError("field '" + field + "' is not a count");
  return static_cast<int>(v);
}

}  // namespace

std::string serialize_weights(const Ensemble& ensemble) {
  std::ostringstream out;
  out << kMagic << '\n' << ensemble.size() << '\n';
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const auto& net = ensemble[k];
    out << "member " << k << ' ' << net.layers.size() << '\n';
    for (const auto& l : net.layers) {
      out << "layer " << to_string(l.branch) << ' ' << to_string(l.activation) << ' ' << l.inputs() << ' '
          << l.outputs() << ' ' << io::format_double(l.dropout) << '\n';
      for (int r = 0; r < l.outputs(); ++r)
        for (int c = 0; c < l.inputs(); ++c) {
          if (r || c) out << ' ';
          out << io::format_double(l.weights(r, c));
        }
      out << '\n';
      for (int r = 0; r < l.outputs(); ++r) {
        if (r) out << ' ';
        out << io::format_double(l.bias[r]);
      }
      out << '\n';
    }
  }
  return out.str();
}

Ensemble deserialize_weights(std::string_view text) {
  LineReader reader(text);
  const auto magic = reader.next("header");
  if (magic != kMagic) throw LoadError("unsupported weight file version '" + std::string(magic) + "'");
  const auto k_tokens = tokens(reader.next("member count"));
  if (k_tokens.size() != 1) throw LoadError("malformed member count");
  const int members = parse_int(k_tokens[0], "member count");
  if (members < 1) throw LoadError("member count must be positive");
  Ensemble ensemble;
  for (int k = 0; k < members; ++k) {
    const std::string where = "member " + std::to_string(k);
    const auto head = tokens(reader.next(where + " header"));
    if (head.size() != 3 || head[0] != "member") throw LoadError("malformed " + where + " header");
    const int n_layers = parse_int(head[2], where + " layer count");
    Network net;
    for (int li = 0; li < n_layers; ++li) {
      const std::string lw = where + " layer " + std::to_string(li);
      const auto shape = tokens(reader.next(lw + " shape"));
      if (shape.size() != 6 || shape[0] != "layer") throw LoadError("malformed " + lw + " shape line");
      Layer l;
      l.branch = parse_branch(shape[1]);
      l.activation = parse_activation(shape[2]);
      const int in = parse_int(shape[3], lw + " inputs");
      const int out = parse_int(shape[4], lw + " outputs");
      l.dropout = io::parse_double(shape[5], lw + " dropout");
      const auto w = tokens(reader.next(lw + " weights"));
      if (w.size() != static_cast<std::size_t>(in) * static_cast<std::size_t>(out))
        throw LoadError(lw + " weights truncated: expected " + std::to_string(in * out) + " values, got " +
                        std::to_string(w.size()));
      l.weights.resize(out, in);
      for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c)
          l.weights(r, c) = io::parse_double(w[static_cast<std::size_t>(r * in + c)], lw + " weights");
      const auto b = tokens(reader.next(lw + " biases"));
      if (b.size() != static_cast<std::size_t>(out))
        throw LoadError(lw + " biases truncated: expected " + std::to_string(out) + " values");
      l.bias.resize(out);
      for (int r = 0; r < out; ++r) l.bias[r] = io::parse_double(b[static_cast<std::size_t>(r)], lw + " biases");
      net.layers.push_back(std::move(l));
    }
    try {
      net.validate();
    } catch (const StructuralError& e) {
      throw LoadError(where + ": " + e.what());
    }
    ensemble.push_back(std::move(net));
  }
  return ensemble;
}

void save_weights(const Ensemble& ensemble, const std::filesystem::path& path) {
  io::write_file(path, serialize_weights(ensemble));
}

Ensemble load_weights(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const IoError& e) {
    throw LoadError(e.what());
  }
  return deserialize_weights(text);
}

}  // namespace footcast
