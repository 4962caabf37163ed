// Command-line surface: training, post-training quantization, integer
// inference, and the analysis reports. Every report echoes its resolved
// configuration so runs are auditable and reproducible.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mint/analyzers.hpp"
#include "mint/checkpoint.hpp"
#include "mint/csv.hpp"
#include "mint/dataset.hpp"
#include "mint/equiv.hpp"
#include "mint/mint_engine.hpp"
#include "mint/trainer.hpp"

namespace {

using namespace mint;

struct CommonOpts {
  std::uint64_t seed = 1;
};

std::string config_echo(const std::string& command,
                        const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream os;
  os << "# mint " << command;
  for (const auto& [k, v] : kv) os << ' ' << k << '=' << v;
  return os.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw IoError("cannot write report '" + out_path + "'");
  out << text;
}

ResetMode reset_from_string(const std::string& s) {
  if (s == "hard") return ResetMode::hard;
  if (s == "soft") return ResetMode::soft;
  throw ValueError("reset mode must be 'hard' or 'soft', got '" + s + "'");
}

// Apply `key = value` lines (# comments) to a parsed subcommand. Explicit
// command-line flags keep priority over file values.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValueError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw ValueError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;  // flag overrides file
    opt->add_result(value);
    opt->run_callback();
  }
}

// Architecture templates sized from the dataset: a two-conv stack for images,
// a two-layer MLP for flat inputs.
NetworkSpec template_net(const std::string& arch, const Shape& input_shape, int classes,
                         std::uint64_t seed) {
  Rng rng(seed ^ 0xA117u);
  NetworkSpec net;
  net.input_shape = input_shape;
  const Index c = input_shape[0], h = input_shape[1], w = input_shape[2];
  auto kaiming = [&](Shape shape, Index fan_in) {
    const double b = std::sqrt(6.0 / static_cast<double>(fan_in));
    return rng.uniform_tensor(std::move(shape), -b, b);
  };
  if (arch == "conv2") {
    const Index c1 = 6, c2 = 10;
    net.layers.push_back(LayerSpec::conv(kaiming({c1, c, 3, 3}, c * 9), 2, 1));
    const Index h1 = conv_out_dim(h, 3, 2, 1), w1 = conv_out_dim(w, 3, 2, 1);
    net.layers.push_back(LayerSpec::conv(kaiming({c2, c1, 3, 3}, c1 * 9), 2, 1));
    const Index h2 = conv_out_dim(h1, 3, 2, 1), w2 = conv_out_dim(w1, 3, 2, 1);
    net.layers.push_back(LayerSpec::linear(kaiming({classes, c2 * h2 * w2}, c2 * h2 * w2)));
  } else if (arch == "mlp") {
    const Index features = c * h * w, hidden = 128;
    net.layers.push_back(LayerSpec::linear(kaiming({hidden, features}, features)));
    net.layers.push_back(LayerSpec::linear(kaiming({classes, hidden}, hidden)));
  } else {
    throw ValueError("unknown --arch '" + arch + "' (conv2 | mlp)");
  }
  return net;
}

struct SplitData {
  LabeledData train;
  LabeledData test;
};

SplitData holdout_split(const LabeledData& data, double holdout) {
  if (holdout <= 0.0) return {data, data};
  const Index n = data.size();
  const Index n_test = std::max<Index>(1, static_cast<Index>(holdout * static_cast<double>(n)));
  const Index n_train = n - n_test;
  if (n_train < 1) throw ValueError("--holdout leaves no training samples");
  const Index len = data.images.size() / n;
  SplitData s;
  s.train.n_classes = s.test.n_classes = data.n_classes;
  s.train.images = TensorR({n_train, data.images.dim(1), data.images.dim(2), data.images.dim(3)});
  s.test.images = TensorR({n_test, data.images.dim(1), data.images.dim(2), data.images.dim(3)});
  std::copy_n(data.images.data(), n_train * len, s.train.images.data());
  std::copy_n(data.images.data() + n_train * len, n_test * len, s.test.images.data());
  s.train.labels.assign(data.labels.begin(), data.labels.begin() + n_train);
  s.test.labels.assign(data.labels.begin() + n_train, data.labels.end());
  return s;
}

// Batched integer inference accumulating accuracy and sparsity counters.
struct EvalStats {
  double accuracy = 0.0;
  double sparsity = 0.0;
  Index samples = 0;
};

EvalStats eval_mint(const MintNetwork& net, const LabeledData& data, int timesteps, Index limit,
                    Index batch_size = 256) {
  EvalStats st;
  const Index n = limit > 0 ? std::min<Index>(limit, data.size()) : data.size();
  const Index len = data.images.size() / data.size();
  std::uint64_t spikes = 0, slots = 0;
  Index hits = 0;
  for (Index start = 0; start < n; start += batch_size) {
    const Index bsz = std::min<Index>(batch_size, n - start);
    TensorR batch({bsz, data.images.dim(1), data.images.dim(2), data.images.dim(3)});
    std::copy_n(data.images.data() + start * len, bsz * len, batch.data());
    const MintForward fwd = mint_forward(net, batch, timesteps);
    spikes += fwd.record.total_spikes();
    slots += fwd.record.total_slots();
    for (Index b = 0; b < bsz; ++b) {
      Index best = 0;
      for (Index j = 1; j < fwd.logits.dim(1); ++j)
        if (fwd.logits.at2(b, j) > fwd.logits.at2(b, best)) best = j;
      if (best == data.labels[start + b]) ++hits;
    }
  }
  st.samples = n;
  st.accuracy = static_cast<double>(hits) / static_cast<double>(n);
  st.sparsity = slots == 0 ? 1.0 : 1.0 - static_cast<double>(spikes) / static_cast<double>(slots);
  return st;
}

int cmd_train(const std::string& data_spec, const std::string& arch, TrainConfig cfg,
              double holdout, const std::string& out_ckpt, const std::string& out_metrics) {
  const LabeledData data = load_dataset(data_spec);
  const SplitData split = holdout_split(data, holdout);
  NetworkSpec net = template_net(arch, {data.images.dim(1), data.images.dim(2),
                                        data.images.dim(3)},
                                 data.n_classes, cfg.seed);
  const TrainResult res = train(std::move(net), split.train, cfg);

  const std::string echo = config_echo(
      "train", {{"data", data_spec},
                {"arch", arch},
                {"epochs", std::to_string(cfg.epochs)},
                {"batch", std::to_string(cfg.batch_size)},
                {"lr", csv_num(cfg.learning_rate)},
                {"timesteps", std::to_string(cfg.timesteps)},
                {"vth", csv_num(cfg.v_th)},
                {"reset", cfg.reset == ResetMode::hard ? "hard" : "soft"},
                {"wbits", std::to_string(cfg.n_w)},
                {"ubits", std::to_string(cfg.n_u)},
                {"seed", std::to_string(cfg.seed)},
                {"holdout", csv_num(holdout)}});
  std::ostringstream csv;
  csv << echo << "\nepoch,loss,acc,sparsity\n";
  for (const EpochMetrics& m : res.metrics)
    csv << m.epoch << ',' << csv_num(m.loss) << ',' << csv_num(m.accuracy) << ','
        << csv_num(m.sparsity) << "\n";
  emit(csv.str(), out_metrics);
  if (!out_metrics.empty()) std::cout << echo << "\n";

  const double test_acc = evaluate_accuracy(res.state, split.test);
  std::cout << "final_train_acc=" << csv_num(res.metrics.empty() ? 0.0
                                                                 : res.metrics.back().accuracy)
            << " test_acc=" << csv_num(test_acc) << "\n";

  if (!out_ckpt.empty()) {
    if (cfg.quantized()) {
      save_checkpoint(out_ckpt,
                      quantize_network(res.state.net, cfg.n_w, cfg.n_u, cfg.v_th, cfg.reset),
                      cfg.timesteps);
    } else {
      save_checkpoint(out_ckpt, res.state.net, cfg.lif());
    }
    std::cout << "checkpoint written to " << out_ckpt << "\n";
  }
  return 0;
}

int cmd_quantize(const std::string& in_path, const std::string& out_path, int n_w, int n_u,
                 double vth_override) {
  const Checkpoint ck = load_checkpoint(in_path);
  if (ck.quantized) throw ValueError("'" + in_path + "' is already a quantized checkpoint");
  const double v_th = vth_override > 0.0 ? vth_override : ck.v_th;
  const MintNetwork q = quantize_network(ck.float_net, n_w, n_u, v_th, ck.reset);
  save_checkpoint(out_path, q, ck.timesteps);
  std::cout << config_echo("quantize", {{"in", in_path},
                                        {"out", out_path},
                                        {"wbits", std::to_string(n_w)},
                                        {"ubits", std::to_string(n_u)},
                                        {"vth", csv_num(v_th)}})
            << "\nquantized checkpoint written to " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_spec, Index limit,
             int timesteps_override) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  if (!ck.quantized)
    throw ValueError("eval runs the integer engine; quantize '" + ckpt_path + "' first");
  const LabeledData data = load_dataset(data_spec);
  const int timesteps = timesteps_override > 0 ? timesteps_override : ck.timesteps;
  const EvalStats st = eval_mint(ck.mint_net, data, timesteps, limit);
  std::cout << config_echo("eval", {{"ckpt", ckpt_path},
                                    {"data", data_spec},
                                    {"timesteps", std::to_string(timesteps)},
                                    {"samples", std::to_string(st.samples)}})
            << "\nsamples,accuracy,sparsity\n"
            << st.samples << ',' << csv_num(st.accuracy) << ',' << csv_num(st.sparsity) << "\n";
  return 0;
}

int cmd_footprint(const std::string& arch, int n_w, int n_u, int batch,
                  const std::string& out_path) {
  const ArchShape shape = arch_by_name(arch);
  const FootprintReport r = footprint(shape, n_w, n_u, batch);
  const FootprintReport full = footprint(shape, 32, 32, batch);
  const double reduction =
      1.0 - static_cast<double>(r.total_bytes) / static_cast<double>(full.total_bytes);
  std::ostringstream os;
  os << config_echo("footprint", {{"arch", arch},
                                  {"wbits", std::to_string(n_w)},
                                  {"ubits", std::to_string(n_u)},
                                  {"batch", std::to_string(batch)}})
     << "\n"
     << FootprintReport::csv_header() << ",reduction_vs_fp32_percent\n"
     << r.csv_row() << ',' << csv_num(100.0 * reduction) << "\n";
  emit(os.str(), out_path);
  return 0;
}

int cmd_hwcost(const std::string& datapath, int n_w, int n_u, int array_size,
               const std::string& table_path, const std::string& out_path) {
  const CostTable table = table_path.empty() ? CostTable() : CostTable::load(table_path);
  const HwCostReport r = pe_cost(datapath_from_string(datapath), n_w, n_u, array_size, table);
  std::ostringstream os;
  os << config_echo("hwcost", {{"datapath", datapath},
                               {"wbits", std::to_string(n_w)},
                               {"ubits", std::to_string(n_u)},
                               {"array_size", std::to_string(array_size)}})
     << "\n"
     << HwCostReport::csv_header() << "\n"
     << r.csv_row() << "\n"
     << "unit,count,unit_energy,unit_area\n";
  for (const HwUnitEntry& e : r.breakdown)
    os << e.unit << ',' << e.count << ',' << csv_num(e.unit_energy) << ',' << csv_num(e.unit_area)
       << "\n";
  emit(os.str(), out_path);
  return 0;
}

int cmd_sparsity(const std::string& ckpt_path, const std::string& data_spec, Index limit) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  if (!ck.quantized)
    throw ValueError("sparsity runs the integer engine; quantize '" + ckpt_path + "' first");
  const LabeledData data = load_dataset(data_spec);
  const EvalStats st = eval_mint(ck.mint_net, data, ck.timesteps, limit);
  std::cout << config_echo("sparsity", {{"ckpt", ckpt_path},
                                        {"data", data_spec},
                                        {"timesteps", std::to_string(ck.timesteps)},
                                        {"samples", std::to_string(st.samples)}})
            << "\nsamples,sparsity,expected_spikes_per_neuron\n"
            << st.samples << ',' << csv_num(st.sparsity) << ','
            << csv_num((1.0 - st.sparsity) * ck.timesteps) << "\n";
  return 0;
}

int cmd_equiv_check(int seeds, std::uint64_t base_seed) {
  const EquivReport r = run_equivalence_suite(seeds, base_seed);
  std::cout << config_echo("equiv-check", {{"seeds", std::to_string(seeds)},
                                           {"base_seed", std::to_string(base_seed)}})
            << "\n"
            << r.cases << " networks checked, " << r.spike_mismatches << " mismatches, "
            << r.multiplier_violations << " multiplier violations across "
            << r.hidden_layers_audited << " hidden layers\n";
  return r.clean() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MINT: shared-scale integer quantization toolkit for spiking networks"};
  app.require_subcommand(1);
  std::string config_path;

  // train
  auto* train_cmd = app.add_subcommand("train", "quantization-aware (or fp32) BPTT training");
  train_cmd->add_option("--config", config_path, "key = value configuration file (# comments)");
  std::string data_spec = "synthetic:classes=4,dim=16,n=10000,seed=7";
  std::string arch = "conv2";
  TrainConfig tcfg;
  tcfg.epochs = 20;  // desk-scale default
  double holdout = 0.2;
  std::string reset_str = "hard";
  std::string out_ckpt, out_metrics;
  train_cmd->add_option("--data", data_spec, "dataset spec (synthetic:... or images.idx,labels.idx)");
  train_cmd->add_option("--arch", arch, "network template: conv2 | mlp");
  train_cmd->add_option("--epochs", tcfg.epochs, "training epochs");
  train_cmd->add_option("--batch", tcfg.batch_size, "minibatch size");
  train_cmd->add_option("--lr", tcfg.learning_rate, "learning rate");
  train_cmd->add_option("--timesteps", tcfg.timesteps, "timesteps T");
  train_cmd->add_option("--vth", tcfg.v_th, "firing threshold");
  train_cmd->add_option("--reset", reset_str, "reset mode: hard | soft");
  train_cmd->add_option("--wbits", tcfg.n_w, "weight bits (0 = fp32 baseline)");
  train_cmd->add_option("--ubits", tcfg.n_u, "membrane bits (0 = fp32 baseline)");
  train_cmd->add_option("--seed", tcfg.seed, "RNG seed");
  train_cmd->add_option("--holdout", holdout, "test fraction held out from the end");
  train_cmd->add_option("--out-ckpt", out_ckpt, "checkpoint output path");
  train_cmd->add_option("--out-metrics", out_metrics, "metrics CSV output path");

  // quantize
  auto* quant_cmd = app.add_subcommand("quantize", "fold a float checkpoint onto the integer grid");
  quant_cmd->add_option("--config", config_path, "key = value configuration file (# comments)");
  std::string q_in, q_out;
  int q_wbits = 8, q_ubits = 8;
  double q_vth = 0.0;
  quant_cmd->add_option("--in", q_in, "float checkpoint")->required();
  quant_cmd->add_option("--out", q_out, "quantized checkpoint")->required();
  quant_cmd->add_option("--wbits", q_wbits, "weight bits [2, 8]");
  quant_cmd->add_option("--ubits", q_ubits, "membrane bits [2, 8]");
  quant_cmd->add_option("--vth", q_vth, "override the stored firing threshold");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "integer-engine accuracy and sparsity");
  eval_cmd->add_option("--config", config_path, "key = value configuration file (# comments)");
  std::string e_ckpt, e_data;
  Index e_limit = 0;
  int e_timesteps = 0;
  eval_cmd->add_option("--ckpt", e_ckpt, "quantized checkpoint")->required();
  eval_cmd->add_option("--data", e_data, "dataset spec")->required();
  eval_cmd->add_option("--limit", e_limit, "evaluate at most N samples");
  eval_cmd->add_option("--timesteps", e_timesteps, "override stored timesteps");

  // footprint
  auto* foot_cmd = app.add_subcommand("footprint", "memory footprint model");
  foot_cmd->add_option("--config", config_path, "key = value configuration file (# comments)");
  std::string f_arch = "vgg16-cifar10", f_out;
  int f_wbits = 2, f_ubits = 2, f_batch = 1;
  foot_cmd->add_option("--arch", f_arch, "vgg9-cifar10 | vgg16-cifar10 | vgg16-tinyimagenet");
  foot_cmd->add_option("--wbits", f_wbits, "weight bits (32 = fp32)");
  foot_cmd->add_option("--ubits", f_ubits, "membrane bits (32 = fp32)");
  foot_cmd->add_option("--batch", f_batch, "mini-batch size");
  foot_cmd->add_option("--out", f_out, "CSV output path");

  // hwcost
  auto* hw_cmd = app.add_subcommand("hwcost", "PE-array cost model");
  hw_cmd->add_option("--config", config_path, "key = value configuration file (# comments)");
  std::string h_datapath = "mint", h_table, h_out;
  int h_wbits = 8, h_ubits = 8, h_array = 128;
  hw_cmd->add_option("--datapath", h_datapath, "mint | naive_uq | fixed_point");
  hw_cmd->add_option("--wbits", h_wbits, "weight bits");
  hw_cmd->add_option("--ubits", h_ubits, "membrane bits");
  hw_cmd->add_option("--array-size", h_array, "number of PEs");
  hw_cmd->add_option("--cost-table", h_table, "cost table file (key = value)");
  hw_cmd->add_option("--out", h_out, "CSV output path");

  // sparsity
  auto* sp_cmd = app.add_subcommand("sparsity", "average spike sparsity of a model on a dataset");
  sp_cmd->add_option("--config", config_path, "key = value configuration file (# comments)");
  std::string s_ckpt, s_data;
  Index s_limit = 0;
  sp_cmd->add_option("--ckpt", s_ckpt, "quantized checkpoint")->required();
  sp_cmd->add_option("--data", s_data, "dataset spec")->required();
  sp_cmd->add_option("--limit", s_limit, "use at most N samples");

  // equiv-check
  auto* eq_cmd = app.add_subcommand("equiv-check",
                                    "integer engine vs simulated quantization, bit-for-bit");
  eq_cmd->add_option("--config", config_path, "key = value configuration file (# comments)");
  int eq_seeds = 500;
  std::uint64_t eq_base = 2024;
  eq_cmd->add_option("--seeds", eq_seeds, "number of random networks");
  eq_cmd->add_option("--base-seed", eq_base, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints usage/help text
    return code == 0 ? 0 : 2;
  }

  try {
    for (CLI::App* sub : app.get_subcommands()) apply_config_file(sub, config_path);
    if (*train_cmd) {
      tcfg.reset = reset_from_string(reset_str);
      return cmd_train(data_spec, arch, tcfg, holdout, out_ckpt, out_metrics);
    }
    if (*quant_cmd) return cmd_quantize(q_in, q_out, q_wbits, q_ubits, q_vth);
    if (*eval_cmd) return cmd_eval(e_ckpt, e_data, e_limit, e_timesteps);
    if (*foot_cmd) return cmd_footprint(f_arch, f_wbits, f_ubits, f_batch, f_out);
    if (*hw_cmd) return cmd_hwcost(h_datapath, h_wbits, h_ubits, h_array, h_table, h_out);
    if (*sp_cmd) return cmd_sparsity(s_ckpt, s_data, s_limit);
    if (*eq_cmd) return cmd_equiv_check(eq_seeds, eq_base);
  } catch (const IoError& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 1;
  } catch (const ShapeError& e) {
    std::cerr << "error: shape: " << e.what() << "\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "error: invariant: " << e.what() << "\n";
    return 1;
  } catch (const ValueError& e) {
    std::cerr << "error: value: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
