#include "ilnn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ilnn {

namespace fs = std::filesystem;

// --------------------------------------------------------------------------
// Config
// --------------------------------------------------------------------------

void RunConfig::validate() const {
  if (!seed_set) throw ConfigError("seed is mandatory; every run must be reproducible");
  if (model != "mlp" && model != "cnn") throw ConfigError("model must be mlp or cnn");
  if (head != "plfc" && head != "lfc") throw ConfigError("head must be plfc or lfc");
  if (!(curvature < 0.0)) throw ConfigError("curvature must be negative");
  if (epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(lr_drop_gamma > 0.0)) throw ConfigError("lr_drop_gamma must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be nonnegative");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must lie in [0,1)");
  if (dropout_p < 0.0 || dropout_p >= 1.0) throw ConfigError("dropout_p must lie in [0,1)");
  if (bench_batch < 1 || bench_dim < 1 || bench_reps < 1) {
    throw ConfigError("bench parameters must be positive");
  }
  // Parse check for the norm string.
  (void)model_config(16, 2);
}

ModelConfig RunConfig::model_config(std::size_t input_dim, std::size_t classes) const {
  ModelConfig mc;
  mc.preset = model;
  mc.input_dim = input_dim;
  mc.classes = classes;
  mc.hidden = hidden;
  mc.head = head == "plfc" ? HeadKind::plfc : HeadKind::lfc;
  if (norm == "gyrolbn") {
    mc.norm.kind = NormSpec::Kind::gyrolbn;
  } else if (norm == "none") {
    mc.norm.kind = NormSpec::Kind::none;
  } else if (norm.rfind("gyrobn-iter", 0) == 0) {
    mc.norm.kind = NormSpec::Kind::gyrobn;
    const std::string tail = norm.substr(11);
    try {
      mc.norm.iters = std::stoi(tail);
    } catch (const std::exception&) {
      throw ConfigError("norm: cannot parse iteration count in '" + norm + "'");
    }
    if (mc.norm.iters < 1) throw ConfigError("norm: iteration count must be positive");
  } else {
    throw ConfigError("norm must be gyrolbn, gyrobn-iterN or none, got '" + norm + "'");
  }
  mc.dropout_p = dropout_p;
  mc.curvature = curvature;
  mc.track_running = track_running;
  return mc;
}

fs::path RunConfig::checkpoint_path() const {
  if (!checkpoint.empty()) return checkpoint;
  return fs::path(out_dir) / "checkpoint.ilnn";
}

std::map<std::string, std::string> parse_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    entries[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return entries;
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    out.push_back(std::stoi(cell));
  }
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "on") return true;
  if (s == "0" || s == "false" || s == "off") return false;
  throw ConfigError("expected a boolean (0/1/true/false), got '" + s + "'");
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void apply_config_entries(RunConfig& config, const std::map<std::string, std::string>& entries) {
  for (const auto& [key, value] : entries) {
    try {
      if (key == "dataset") {
        config.dataset_dir = value;
      } else if (key == "out") {
        config.out_dir = value;
      } else if (key == "checkpoint") {
        config.checkpoint = value;
      } else if (key == "model") {
        config.model = value;
      } else if (key == "head") {
        config.head = value;
      } else if (key == "norm") {
        config.norm = value;
      } else if (key == "hidden") {
        config.hidden.clear();
        for (int h : parse_int_list(value)) {
          if (h < 1) throw ConfigError("hidden widths must be positive");
          config.hidden.push_back(static_cast<std::size_t>(h));
        }
      } else if (key == "curvature") {
        config.curvature = std::stod(value);
      } else if (key == "epochs") {
        config.epochs = std::stoi(value);
      } else if (key == "batch_size") {
        config.batch_size = std::stoi(value);
      } else if (key == "lr") {
        config.lr = std::stod(value);
      } else if (key == "lr_drop_epochs") {
        config.lr_drop_epochs = parse_int_list(value);
      } else if (key == "lr_drop_gamma") {
        config.lr_drop_gamma = std::stod(value);
      } else if (key == "weight_decay") {
        config.weight_decay = std::stod(value);
      } else if (key == "momentum") {
        config.momentum = std::stod(value);
      } else if (key == "dropout_p") {
        config.dropout_p = std::stod(value);
      } else if (key == "track_running") {
        config.track_running = parse_bool(value);
      } else if (key == "seed") {
        config.seed = std::stoull(value);
        config.seed_set = true;
      } else if (key == "synth_depth") {
        config.synth_depth = std::stoi(value);
      } else if (key == "synth_branching") {
        config.synth_branching = std::stoi(value);
      } else if (key == "synth_dim") {
        config.synth_dim = std::stoi(value);
      } else if (key == "synth_samples_per_leaf") {
        config.synth_samples_per_leaf = std::stoi(value);
      } else if (key == "synth_noise") {
        config.synth_noise = std::stod(value);
      } else if (key == "bench_batch") {
        config.bench_batch = std::stoi(value);
      } else if (key == "bench_dim") {
        config.bench_dim = std::stoi(value);
      } else if (key == "bench_reps") {
        config.bench_reps = std::stoi(value);
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("cannot parse value for config key '" + key + "': " + value);
    }
  }
}

std::string canonical_config(const RunConfig& c) {
  std::ostringstream os;
  os << "batch_size=" << c.batch_size << '\n';
  os << "bench_batch=" << c.bench_batch << '\n';
  os << "bench_dim=" << c.bench_dim << '\n';
  os << "bench_reps=" << c.bench_reps << '\n';
  os << "curvature=" << fmt_double(c.curvature) << '\n';
  os << "dataset=" << c.dataset_dir << '\n';
  os << "dropout_p=" << fmt_double(c.dropout_p) << '\n';
  os << "epochs=" << c.epochs << '\n';
  os << "head=" << c.head << '\n';
  os << "hidden=";
  for (std::size_t i = 0; i < c.hidden.size(); ++i) os << (i ? "," : "") << c.hidden[i];
  os << '\n';
  os << "lr=" << fmt_double(c.lr) << '\n';
  os << "lr_drop_epochs=";
  for (std::size_t i = 0; i < c.lr_drop_epochs.size(); ++i) {
    os << (i ? "," : "") << c.lr_drop_epochs[i];
  }
  os << '\n';
  os << "lr_drop_gamma=" << fmt_double(c.lr_drop_gamma) << '\n';
  os << "model=" << c.model << '\n';
  os << "momentum=" << fmt_double(c.momentum) << '\n';
  os << "norm=" << c.norm << '\n';
  os << "out=" << c.out_dir << '\n';
  os << "seed=" << c.seed << '\n';
  os << "synth_branching=" << c.synth_branching << '\n';
  os << "synth_depth=" << c.synth_depth << '\n';
  os << "synth_dim=" << c.synth_dim << '\n';
  os << "synth_noise=" << fmt_double(c.synth_noise) << '\n';
  os << "synth_samples_per_leaf=" << c.synth_samples_per_leaf << '\n';
  os << "track_running=" << (c.track_running ? 1 : 0) << '\n';
  os << "weight_decay=" << fmt_double(c.weight_decay) << '\n';
  return os.str();
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string text = canonical_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// --------------------------------------------------------------------------
// Checkpoints
// --------------------------------------------------------------------------

namespace {

constexpr char kCkptMagic[8] = {'I', 'L', 'N', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint16_t kCkptVersion = 1;

void put_u16v(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32v(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64v(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

}  // namespace

void save_checkpoint(const fs::path& path, const std::vector<NamedTensor>& sections,
                     std::uint64_t hash) {
  std::vector<std::uint8_t> bytes;
  bytes.insert(bytes.end(), kCkptMagic, kCkptMagic + 8);
  put_u16v(bytes, kCkptVersion);
  put_u64v(bytes, hash);
  put_u32v(bytes, static_cast<std::uint32_t>(sections.size()));
  for (const NamedTensor& s : sections) {
    put_u16v(bytes, static_cast<std::uint16_t>(s.name.size()));
    bytes.insert(bytes.end(), s.name.begin(), s.name.end());
    append_tensor_record(bytes, s.value);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("checkpoint write failed: " + path.string());
}

const Tensor& Checkpoint::section(const std::string& name) const {
  for (const NamedTensor& s : sections) {
    if (s.name == name) return s.value;
  }
  throw ConfigError("checkpoint: missing section '" + name + "'");
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path.string());
  std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>{});
  std::size_t off = 0;
  if (bytes.size() < 8 || !std::equal(kCkptMagic, kCkptMagic + 8, bytes.begin())) {
    throw ConfigError("checkpoint: bad magic in " + path.string());
  }
  off = 8;
  auto get_u16 = [&bytes, &off]() {
    if (off + 2 > bytes.size()) throw ConfigError("checkpoint: truncated");
    std::uint16_t v = static_cast<std::uint16_t>(bytes[off] | (bytes[off + 1] << 8));
    off += 2;
    return v;
  };
  auto get_u32 = [&bytes, &off]() {
    if (off + 4 > bytes.size()) throw ConfigError("checkpoint: truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[off + i]) << (8 * i);
    off += 4;
    return v;
  };
  auto get_u64 = [&bytes, &off]() {
    if (off + 8 > bytes.size()) throw ConfigError("checkpoint: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[off + i]) << (8 * i);
    off += 8;
    return v;
  };

  Checkpoint ckpt;
  if (get_u16() != kCkptVersion) throw ConfigError("checkpoint: unsupported version");
  ckpt.config_hash = get_u64();
  const std::uint32_t count = get_u32();
  ckpt.sections.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = get_u16();
    if (off + name_len > bytes.size()) throw ConfigError("checkpoint: truncated name");
    std::string name(bytes.begin() + static_cast<std::ptrdiff_t>(off),
                     bytes.begin() + static_cast<std::ptrdiff_t>(off + name_len));
    off += name_len;
    Tensor value = parse_tensor_record(bytes, off);
    ckpt.sections.push_back({std::move(name), std::move(value)});
  }
  if (off != bytes.size()) throw ConfigError("checkpoint: trailing bytes");
  return ckpt;
}

Classifier model_from_checkpoint(const Checkpoint& ckpt) {
  ModelConfig mc = Classifier::decode_model_meta(ckpt.section("meta/model"));
  Rng scratch(0);
  Classifier model = Classifier::build(mc, scratch);
  model.load_state_sections(ckpt.sections);
  return model;
}

// --------------------------------------------------------------------------
// Loss
// --------------------------------------------------------------------------

namespace {

Tensor cross_entropy(const Tensor& logits, std::uint32_t label) {
  if (label >= logits.size()) throw ContractError("cross_entropy: label out of range");
  // Shift by the detached max; the gradient is unaffected by the constant.
  double m = logits.at(0);
  for (double v : logits.data()) m = std::max(m, v);
  Tensor lse = log(sum(exp(logits - m))) + m;
  Tensor picked = reshape(gather(logits, {label}), {});
  return lse - picked;
}

std::vector<std::uint32_t> argmax_labels(const std::vector<Tensor>& logits) {
  std::vector<std::uint32_t> out;
  out.reserve(logits.size());
  for (const Tensor& v : logits) {
    const auto& d = v.data();
    std::size_t best = 0;
    for (std::size_t i = 1; i < d.size(); ++i)
      if (d[i] > d[best]) best = i;
    out.push_back(static_cast<std::uint32_t>(best));
  }
  return out;
}

Tensor batch_cross_entropy(const Classifier::BatchOutput& out, const Dataset& ds,
                           const std::vector<std::size_t>& indices) {
  Tensor acc = Tensor::scalar(0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    acc = acc + cross_entropy(out.logits[i], ds.labels[indices[i]]);
  }
  return acc / static_cast<double>(indices.size());
}

}  // namespace

double batch_loss_value(Classifier& model, const Dataset& ds,
                        const std::vector<std::size_t>& indices, Mode mode, Rng& dropout_rng) {
  auto out = model.forward_batch(ds, indices, mode, dropout_rng);
  return batch_cross_entropy(out, ds, indices).item();
}

double train_step(Classifier& model, RsgdOptimizer& optimizer, const Dataset& ds,
                  const std::vector<std::size_t>& indices, Rng& dropout_rng) {
  auto refs = model.param_refs();
  std::vector<Tensor> grads;
  double loss_value = 0.0;
  {
    Tape tape;
    std::vector<Tensor> tracked;
    tracked.reserve(refs.size());
    for (ParamRef& r : refs) {
      if (r.lorentz) {
        Tensor coords = tape.leaf(r.point->coords());
        *r.point = unchecked_point(coords, r.point->curvature());
        tracked.push_back(coords);
      } else {
        *r.tensor = tape.leaf(*r.tensor);
        tracked.push_back(*r.tensor);
      }
    }
    auto out = model.forward_batch(ds, indices, Mode::train, dropout_rng);
    Tensor loss = batch_cross_entropy(out, ds, indices);
    loss_value = loss.item();
    if (!std::isfinite(loss_value)) {
      throw TrainingAbortedError("non-finite training loss; last-good checkpoint retained");
    }
    GradMap gm = tape.backward(loss);
    grads.reserve(tracked.size());
    for (const Tensor& t : tracked) grads.push_back(gm.at(t));
  }
  optimizer.step(grads);
  return loss_value;
}

// --------------------------------------------------------------------------
// Train / evaluate
// --------------------------------------------------------------------------

EvalResult evaluate_model(Classifier& model, const Dataset& ds, int batch_size) {
  if (batch_size < 1) throw ConfigError("evaluate_model: batch_size must be positive");
  Rng unused(0);
  EvalResult result;
  result.predictions.reserve(ds.size());
  for (std::size_t start = 0; start < ds.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t stop = std::min(ds.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<std::size_t> idx(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    auto out = model.forward_batch(ds, idx, Mode::eval, unused);
    for (std::uint32_t p : argmax_labels(out.logits)) result.predictions.push_back(p);
  }
  result.accuracy = accuracy(result.predictions, ds.labels);
  result.mcc = mcc(result.predictions, ds.labels);
  return result;
}

TrainReport train(const RunConfig& config) {
  config.validate();
  if (config.dataset_dir.empty()) throw ConfigError("train: dataset path required");
  Dataset train_ds = load_dataset_split(config.dataset_dir, "train");
  Dataset test_ds = load_dataset_split(config.dataset_dir, "test");
  if (train_ds.class_count < 2) throw ConfigError("train: at least two classes required");

  Rng root(config.seed);
  Rng init_rng = root.fork(0);
  Rng shuffle_rng = root.fork(1);
  Rng dropout_rng = root.fork(2);

  Classifier model =
      Classifier::build(config.model_config(train_ds.dim(), train_ds.class_count), init_rng);

  RsgdOptimizer optimizer({config.lr, config.momentum, config.weight_decay});
  for (ParamRef& r : model.param_refs()) {
    if (r.lorentz) {
      optimizer.add_lorentz(r.name, r.point);
    } else {
      optimizer.add_euclidean(r.name, r.tensor, r.weight_decay, r.constraint);
    }
  }

  fs::create_directories(config.out_dir);
  TrainReport report;
  report.metrics_path = fs::path(config.out_dir) / "metrics.csv";
  report.checkpoint_path = config.checkpoint_path();

  std::ofstream metrics(report.metrics_path, std::ios::trunc);
  if (!metrics) throw ConfigError("cannot write metrics file: " + report.metrics_path.string());
  metrics << "epoch,loss,train_acc,test_acc,test_mcc\n";
  metrics.flush();

  const std::uint64_t hash = config_hash(config);
  save_checkpoint(report.checkpoint_path, model.state_sections(), hash);

  std::vector<std::size_t> order(train_ds.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (int drop : config.lr_drop_epochs) {
      if (drop == epoch) optimizer.set_lr(optimizer.lr() * config.lr_drop_gamma);
    }
    // Fisher-Yates with the run's shuffle stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.below(i));
      std::swap(order[i - 1], order[j]);
    }
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(stop));
      const double batch_loss = train_step(model, optimizer, train_ds, idx, dropout_rng);
      loss_sum += batch_loss * static_cast<double>(idx.size());
      seen += idx.size();
    }

    EpochRow row;
    row.epoch = epoch;
    row.loss = loss_sum / static_cast<double>(seen);
    row.train_acc = evaluate_model(model, train_ds, config.batch_size).accuracy;
    EvalResult test_metrics = evaluate_model(model, test_ds, config.batch_size);
    row.test_acc = test_metrics.accuracy;
    row.test_mcc = test_metrics.mcc;
    report.rows.push_back(row);

    metrics << row.epoch << ',' << fmt_double(row.loss) << ',' << fmt_double(row.train_acc)
            << ',' << fmt_double(row.test_acc) << ',' << fmt_double(row.test_mcc) << '\n';
    metrics.flush();
    save_checkpoint(report.checkpoint_path, model.state_sections(), hash);
  }
  return report;
}

EvalResult evaluate(const RunConfig& config) {
  config.validate();
  if (config.dataset_dir.empty()) throw ConfigError("eval: dataset path required");
  Checkpoint ckpt = load_checkpoint(config.checkpoint_path());
  Classifier model = model_from_checkpoint(ckpt);
  Dataset test_ds = load_dataset_split(config.dataset_dir, "test");
  if (test_ds.dim() != model.config().input_dim) {
    throw ConfigError("eval: dataset dimension does not match the checkpoint");
  }
  if (test_ds.class_count > model.config().classes) {
    throw ConfigError("eval: dataset has more classes than the checkpoint");
  }
  return evaluate_model(model, test_ds, config.batch_size);
}

// --------------------------------------------------------------------------
// bench-norm
// --------------------------------------------------------------------------

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<BenchRecord> bench_norm(const RunConfig& config) {
  config.validate();
  const Curvature curv(config.curvature);
  const std::size_t n = static_cast<std::size_t>(config.bench_dim);
  const std::size_t m = static_cast<std::size_t>(config.bench_batch);

  Rng rng = Rng(config.seed).fork(7);
  LorentzPoint pole = origin(curv, n);
  std::vector<LorentzPoint> batch;
  batch.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> comp(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j) comp[j] = 0.5 * rng.normal();
    batch.push_back(exp_map(pole, unchecked_tangent(pole, Tensor::from_vector(std::move(comp)))));
  }

  struct Variant {
    std::string name;
    bool closed_form;
    IterBudget budget;
  };
  const std::vector<Variant> variants = {
      {"gyrolbn", true, IterBudget::fixed(1)},
      {"gyrobn-iter1", false, IterBudget::fixed(1)},
      {"gyrobn-iter2", false, IterBudget::fixed(2)},
      {"gyrobn-iter5", false, IterBudget::fixed(5)},
      {"gyrobn-iter10", false, IterBudget::fixed(10)},
      {"gyrobn-converge", false, IterBudget::until_convergence()},
  };

  std::vector<BenchRecord> records;
  volatile double sink = 0.0;
  for (const Variant& variant : variants) {
    NormState state = NormState::init(curv, n, 0.1, 1e-5, /*track_running=*/false);
    auto run_once = [&]() {
      auto out = variant.closed_form
                     ? gyrolbn_forward(batch, state, Mode::train)
                     : gyrobn_forward(batch, state, Mode::train, variant.budget);
      sink = sink + out.back().time_value();
    };
    for (int w = 0; w < 3; ++w) run_once();
    std::vector<double> times_ms;
    times_ms.reserve(static_cast<std::size_t>(config.bench_reps));
    for (int rep = 0; rep < config.bench_reps; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      run_once();
      const auto t1 = std::chrono::steady_clock::now();
      times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times_ms.begin(), times_ms.end());
    BenchRecord rec;
    rec.variant = variant.name;
    rec.median_ms = quantile_sorted(times_ms, 0.5);
    rec.iqr_ms = quantile_sorted(times_ms, 0.75) - quantile_sorted(times_ms, 0.25);
    records.push_back(rec);
  }

  fs::create_directories(config.out_dir);
  const fs::path report_path = fs::path(config.out_dir) / "bench.txt";
  std::ofstream out(report_path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write bench report: " + report_path.string());
  out << "bench-norm batch=" << m << " dim=" << n << " reps=" << config.bench_reps << "\n";
  char buf[64];
  for (const BenchRecord& rec : records) {
    std::snprintf(buf, sizeof buf, "variant=%s median_ms=%.6f iqr_ms=%.6f",
                  rec.variant.c_str(), rec.median_ms, rec.iqr_ms);
    out << buf << "\n";
  }
  return records;
}

// --------------------------------------------------------------------------
// export-embeddings / gen-synthetic
// --------------------------------------------------------------------------

fs::path export_embeddings(const RunConfig& config) {
  config.validate();
  if (config.dataset_dir.empty()) throw ConfigError("export: dataset path required");
  Checkpoint ckpt = load_checkpoint(config.checkpoint_path());
  Classifier model = model_from_checkpoint(ckpt);
  Dataset test_ds = load_dataset_split(config.dataset_dir, "test");
  if (test_ds.dim() != model.config().input_dim) {
    throw ConfigError("export: dataset dimension does not match the checkpoint");
  }

  fs::create_directories(config.out_dir);
  const fs::path path = fs::path(config.out_dir) / "embeddings.csv";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write embeddings file: " + path.string());

  Rng unused(0);
  bool wrote_header = false;
  for (std::size_t start = 0; start < test_ds.size();
       start += static_cast<std::size_t>(config.batch_size)) {
    const std::size_t stop =
        std::min(test_ds.size(), start + static_cast<std::size_t>(config.batch_size));
    std::vector<std::size_t> idx(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    auto fwd = model.forward_batch(test_ds, idx, Mode::eval, unused);
    auto preds = argmax_labels(fwd.logits);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const LorentzPoint& p = fwd.penultimate[i];
      if (!wrote_header) {
        out << "label,pred";
        for (std::size_t j = 0; j < p.dim(); ++j) out << ",p" << j;
        for (std::size_t j = 0; j < p.dim(); ++j) out << ",t" << j;
        out << "\n";
        wrote_header = true;
      }
      Tensor ball = lorentz_to_poincare(p);
      LorentzPoint pole = origin(p.curvature(), p.dim());
      Tensor tang = slice(log_map(pole, p).components(), 1, p.dim());
      out << test_ds.labels[idx[i]] << ',' << preds[i];
      for (double v : ball.data()) out << ',' << fmt_double(v);
      for (double v : tang.data()) out << ',' << fmt_double(v);
      out << "\n";
    }
  }
  return path;
}

void run_gen_synthetic(const RunConfig& config) {
  if (!config.seed_set) throw ConfigError("seed is mandatory; every run must be reproducible");
  SyntheticSpec spec;
  spec.depth = config.synth_depth;
  spec.branching = config.synth_branching;
  spec.dim = config.synth_dim;
  spec.samples_per_leaf = config.synth_samples_per_leaf;
  spec.noise = config.synth_noise;
  spec.seed = config.seed;
  auto [train_split, test_split] = gen_synthetic_hierarchy(spec);
  write_dataset_split(config.out_dir, train_split);
  write_dataset_split(config.out_dir, test_split);
}

}  // namespace ilnn
