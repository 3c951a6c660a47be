#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ncomp/compressor.hpp"
#include "ncomp/dataset.hpp"
#include "ncomp/errors.hpp"
#include "ncomp/serialize.hpp"
#include "ncomp/tagging.hpp"
#include "ncomp/training.hpp"

namespace {

using namespace ncomp;

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing file: " + path);
}

// Owns a custom lexicon tagger when one was requested, otherwise hands out
// the built-in English tagger.
class TaggerChoice {
 public:
  explicit TaggerChoice(const std::string& lexicon_path) {
    if (!lexicon_path.empty()) custom_ = LexiconTagger::from_file(lexicon_path);
  }

  const LexiconTagger& get() const { return custom_ ? *custom_ : LexiconTagger::english(); }

 private:
  std::optional<LexiconTagger> custom_;
};

// CLI11 never applies config files owned by subcommands (their _process step
// is skipped), so "--config FILE" is expanded by hand before parsing: each
// "key = value" line becomes "--key=value", inserted directly after the
// subcommand name so that anything explicit on the command line wins.
std::vector<std::string> expand_config_args(std::vector<std::string> args) {
  const bool takes_config =
      !args.empty() && (args.front() == "train" || args.front() == "compress" ||
                        args.front() == "decompress" || args.front() == "eval");
  if (!takes_config) return args;

  std::string path;
  for (auto it = args.begin() + 1; it != args.end();) {
    if (*it == "--config") {
      if (it + 1 == args.end()) throw Error("--config needs a file argument");
      path = *(it + 1);
      it = args.erase(it, it + 2);
    } else if (it->rfind("--config=", 0) == 0) {
      path = it->substr(9);
      it = args.erase(it);
    } else {
      ++it;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  const auto trim = [](const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  const auto given_explicitly = [&args](const std::string& key) {
    const std::string opt = "--" + key;
    return std::any_of(args.begin() + 1, args.end(), [&opt](const std::string& a) {
      return a == opt || a.rfind(opt + "=", 0) == 0;
    });
  };
  std::vector<std::string> expanded;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#' || stripped.front() == ';') continue;
    const auto eq = stripped.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(stripped.substr(0, eq));
    if (key.empty()) {
      throw Error("config file " + path + " line " + std::to_string(lineno) +
                  ": expected key = value");
    }
    std::string value = trim(stripped.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (!given_explicitly(key)) expanded.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 1, expanded.begin(), expanded.end());
  return args;
}

void print_stats(const CompressionStats& st) {
  std::printf("input bytes   %zu\n", st.input_bytes);
  std::printf("output bytes  %zu\n", st.output_bytes);
  std::printf("payload bits  %zu\n", st.payload_bits);
  std::printf("bpc           %.4f\n", st.bpc);
  std::printf("ideal bpc     %.4f\n", st.ideal_bpc);
}

struct TrainArgs {
  std::string corpus;
  std::string model_out;
  std::string tag_file;
  std::string lexicon;
  ModelConfig model;
  TrainingConfig tr;
  std::uint64_t seed = 1;
  bool no_pos = false;
};

struct CodecArgs {
  std::string model;
  std::string input;
  std::string output;
  std::string lexicon;
  bool no_pos = false;
};

struct GradcheckArgs {
  std::uint64_t seed = 1;
  bool corrupt = false;
};

int cmd_train(TrainArgs args) {
  args.model.seed = args.seed;
  args.tr.seed = args.seed;
  args.model.validate();
  args.tr.validate();

  const std::vector<std::uint8_t> text = read_file(args.corpus);
  if (text.size() < static_cast<std::size_t>(args.model.window) + 1) {
    throw Error("corpus " + args.corpus + " too short: need at least " +
                std::to_string(args.model.window + 1) + " bytes, have " +
                std::to_string(text.size()));
  }

  std::vector<std::uint8_t> tags;
  if (args.no_pos) {
    tags.assign(text.size(), 0);
  } else if (!args.tag_file.empty()) {
    tags = load_tag_file(args.tag_file, text);
  } else {
    TaggerChoice tagger(args.lexicon);
    tags = tag_prefix(tagger.get(), text);
  }

  const std::vector<WindowSample> samples =
      make_windows(text, tags, args.model.window, args.tr.stride);
  NetworkParams params = init_params(args.model);
  const PosMode pos = args.no_pos ? PosMode::ablated : PosMode::enabled;
  const TrainResult result = train(params, samples, args.tr, pos, &std::cout);
  save_model(params, args.model_out);

  if (!result.epochs.empty()) {
    const EpochStats& last = result.epochs.back();
    std::printf("model written to %s (%zu samples, final loss %.6f, accuracy %.4f)\n",
                args.model_out.c_str(), samples.size(), last.mean_loss, last.accuracy);
  }
  return 0;
}

int cmd_compress(const CodecArgs& args) {
  const LoadedModel model = load_model(args.model);
  const std::vector<std::uint8_t> text = read_file(args.input);
  const TaggerChoice tagger(args.lexicon);
  const std::string out_path = args.output.empty() ? args.input + ".ncz" : args.output;

  CompressionStats st;
  const std::vector<std::uint8_t> container =
      compress(text, model.params, model.checksum, tagger.get(),
               args.no_pos ? PosMode::ablated : PosMode::enabled, &st);
  write_file(out_path, container);
  std::printf("%s -> %s\n", args.input.c_str(), out_path.c_str());
  print_stats(st);
  return 0;
}

int cmd_decompress(const CodecArgs& args) {
  const LoadedModel model = load_model(args.model);
  const std::vector<std::uint8_t> container = read_file(args.input);
  const TaggerChoice tagger(args.lexicon);

  std::string out_path = args.output;
  if (out_path.empty()) {
    if (args.input.size() > 4 && args.input.ends_with(".ncz")) {
      out_path = args.input.substr(0, args.input.size() - 4);
    } else {
      out_path = args.input + ".out";
    }
  }

  const std::vector<std::uint8_t> text =
      decompress(container, model.params, model.checksum, tagger.get());
  write_file(out_path, text);
  std::printf("%s -> %s (%zu bytes)\n", args.input.c_str(), out_path.c_str(), text.size());
  return 0;
}

int cmd_eval(const CodecArgs& args) {
  const LoadedModel model = load_model(args.model);
  const std::vector<std::uint8_t> text = read_file(args.input);
  const TaggerChoice tagger(args.lexicon);

  const CompressionStats st = evaluate_bpc(text, model.params, tagger.get(),
                                           args.no_pos ? PosMode::ablated : PosMode::enabled);
  std::printf("model\n");
  print_stats(st);
  const CompressionStats base = baseline_order0(text);
  std::printf("order-0 baseline\n");
  print_stats(base);
  return 0;
}

// Finite-difference error of a single deliberately wrong analytic entry.
// Exists so the failure path of the gradient check can be demonstrated and
// tested end to end.
double corrupted_check(const NetworkParams& params, const WindowSample& sample) {
  const Eigen::Index steps = static_cast<Eigen::Index>(params.config.window);
  const Eigen::MatrixXd ones_c =
      Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(params.config.char_gru_units), steps);
  const Eigen::MatrixXd ones_p =
      Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(params.config.pos_gru_units), steps);
  ForwardTrace trace;
  forward_train_with_masks(params, sample.context, sample.tags, PosMode::enabled, ones_c,
                           ones_p, trace);
  const Gradients g = backward(params, trace, sample.target);
  const double analytic = g.merged_gru.u_h(0, 0) + 0.05;

  const double h = 1e-5;
  NetworkParams work = params;
  const double orig = work.merged_gru.u_h(0, 0);
  work.merged_gru.u_h(0, 0) = orig + h;
  const double up =
      cross_entropy_loss(forward_infer(work, sample.context, sample.tags), sample.target);
  work.merged_gru.u_h(0, 0) = orig - h;
  const double down =
      cross_entropy_loss(forward_infer(work, sample.context, sample.tags), sample.target);
  const double fd = (up - down) / (2.0 * h);
  return std::abs(analytic - fd) / std::max(1e-8, std::abs(analytic) + std::abs(fd));
}

int cmd_gradcheck(const GradcheckArgs& args) {
  ModelConfig cfg;
  cfg.window = 5;
  cfg.char_gru_units = 4;
  cfg.pos_gru_units = 4;
  cfg.merged_gru_units = 4;
  cfg.dense1_units = 8;
  cfg.dropout_rho = 0.0;
  cfg.seed = args.seed;
  const NetworkParams params = init_params(cfg);

  Rng rng(args.seed ^ 0x5DEECE66Dull);
  WindowSample sample;
  for (std::uint32_t i = 0; i < cfg.window; ++i) {
    sample.context.push_back(static_cast<std::uint8_t>(rng.next_below(256)));
    sample.tags.push_back(static_cast<std::uint8_t>(rng.next_below(kTagAlphabetSize)));
  }
  sample.target = static_cast<std::uint8_t>(rng.next_below(256));

  for (const double h : {1e-4, 1e-5, 1e-6}) {
    std::printf("h = %g  max relative error = %.3e\n", h, grad_check(params, sample, h));
  }
  const double err =
      args.corrupt ? corrupted_check(params, sample) : grad_check(params, sample, 1e-5);
  std::printf("verdict: max relative error %.3e (threshold 1e-4)\n", err);
  return err < 1e-4 ? 0 : 1;
}

int cmd_tags() {
  const TagSet& ts = TagSet::penn();
  for (std::size_t id = 0; id < ts.size(); ++id) {
    std::printf("%2zu\t%s\n", id, std::string(ts.name(static_cast<std::uint8_t>(id))).c_str());
  }
  return 0;
}

void add_model_options(CLI::App* cmd, TrainArgs& args) {
  cmd->add_option("--window", args.model.window, "context length in bytes")
      ->capture_default_str();
  cmd->add_option("--char-gru-units", args.model.char_gru_units, "character branch width")
      ->capture_default_str();
  cmd->add_option("--pos-gru-units", args.model.pos_gru_units, "part-of-speech branch width")
      ->capture_default_str();
  cmd->add_option("--merged-gru-units", args.model.merged_gru_units, "merged layer width")
      ->capture_default_str();
  cmd->add_option("--dense1-units", args.model.dense1_units, "hidden dense layer width")
      ->capture_default_str();
  cmd->add_option("--dropout-rho", args.model.dropout_rho, "dropout fraction in [0,1)")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural text compressor: GRU-predicted range coding"};
  app.require_subcommand(1);
  std::string config_path;  // listed for --help; expand_config_args consumes it first

  TrainArgs train_args;
  train_args.tr.epochs = 100;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model on a corpus");
  train_cmd->add_option("--corpus", train_args.corpus, "training text")->required();
  train_cmd->add_option("--model-out", train_args.model_out, "output model path")->required();
  add_model_options(train_cmd, train_args);
  train_cmd->add_option("--epochs", train_args.tr.epochs, "training epochs")
      ->capture_default_str();
  train_cmd->add_option("--eta", train_args.tr.eta, "learning rate")->capture_default_str();
  train_cmd->add_option("--epsilon", train_args.tr.epsilon, "update denominator stabilizer")
      ->capture_default_str();
  train_cmd->add_option("--stride", train_args.tr.stride, "window step")->capture_default_str();
  train_cmd->add_option("--batch", train_args.tr.batch, "samples per update")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_args.seed, "seed for init, shuffling, and dropout")
      ->capture_default_str();
  train_cmd->add_option("--tag-file", train_args.tag_file,
                        "pre-computed word<TAB>tag file instead of the built-in tagger");
  train_cmd->add_option("--lexicon", train_args.lexicon, "custom lexicon file for the tagger");
  train_cmd->add_flag("--no-pos", train_args.no_pos, "disable the part-of-speech channel");
  train_cmd->add_option("--config", config_path, "key = value config file");

  CodecArgs compress_args;
  CLI::App* compress_cmd = app.add_subcommand("compress", "compress a file with a model");
  compress_cmd->add_option("--model", compress_args.model, "model file")->required();
  compress_cmd->add_option("--input", compress_args.input, "file to compress")->required();
  compress_cmd->add_option("--output", compress_args.output, "output path (default input + .ncz)");
  compress_cmd->add_option("--lexicon", compress_args.lexicon, "custom lexicon file");
  compress_cmd->add_flag("--no-pos", compress_args.no_pos, "disable the part-of-speech channel");
  compress_cmd->add_option("--config", config_path, "key = value config file");

  CodecArgs decompress_args;
  CLI::App* decompress_cmd = app.add_subcommand("decompress", "restore a compressed file");
  decompress_cmd->add_option("--model", decompress_args.model, "model file")->required();
  decompress_cmd->add_option("--input", decompress_args.input, "compressed container")
      ->required();
  decompress_cmd->add_option("--output", decompress_args.output,
                             "output path (default strips .ncz)");
  decompress_cmd->add_option("--lexicon", decompress_args.lexicon, "custom lexicon file");
  decompress_cmd->add_option("--config", config_path, "key = value config file");

  CodecArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "report bpc without writing output");
  eval_cmd->add_option("--model", eval_args.model, "model file")->required();
  eval_cmd->add_option("--input", eval_args.input, "file to evaluate")->required();
  eval_cmd->add_option("--lexicon", eval_args.lexicon, "custom lexicon file");
  eval_cmd->add_flag("--no-pos", eval_args.no_pos, "disable the part-of-speech channel");
  eval_cmd->add_option("--config", config_path, "key = value config file");

  GradcheckArgs gradcheck_args;
  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "verify analytic gradients against finite differences");
  gradcheck_cmd->add_option("--seed", gradcheck_args.seed, "network and sample seed")
      ->capture_default_str();
  gradcheck_cmd->add_flag("--corrupt", gradcheck_args.corrupt)->group("");  // failure-path canary

  CLI::App* tags_cmd = app.add_subcommand("tags", "list the tag inventory");

  std::vector<std::string> args;
  try {
    args = expand_config_args({argv + 1, argv + argc});
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::reverse(args.begin(), args.end());  // App::parse consumes back to front
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (compress_cmd->parsed()) return cmd_compress(compress_args);
    if (decompress_cmd->parsed()) return cmd_decompress(decompress_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(gradcheck_args);
    if (tags_cmd->parsed()) return cmd_tags();
  } catch (const ChecksumError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const CorruptStreamError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
