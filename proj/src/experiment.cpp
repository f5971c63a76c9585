#include "flexsim/experiment.hpp"

#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "flexsim/error.hpp"
#include "flexsim/random.hpp"

namespace flexsim {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTestSplitStream = 0x7e57;

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::ConfigError, message); }

// Typed, strict access to one JSON object: every key must be consumed.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (root.contains(name_)) {
      if (!root.at(name_).is_object()) config_error("section '" + name_ + "' must be an object");
      object_ = &root.at(name_);
    }
  }

  bool present() const { return object_ != nullptr; }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    used_.insert(key);
    if (!object_ || !object_->contains(key) || object_->at(key).is_null()) return std::nullopt;
    const json& value = object_->at(key);
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!value.is_number_unsigned()) config_error(where(key) + " must be a nonnegative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!value.is_number()) config_error(where(key) + " must be a number");
    }
    try {
      return value.get<T>();
    } catch (const json::exception&) {
      config_error(where(key) + " has the wrong type");
    }
  }

  template <typename T>
  T value_or(const std::string& key, T fallback) {
    auto v = optional<T>(key);
    return v ? *v : fallback;
  }

  const json* raw(const std::string& key) {
    used_.insert(key);
    if (!object_ || !object_->contains(key) || object_->at(key).is_null()) return nullptr;
    return &object_->at(key);
  }

  void finish() const {
    if (!object_) return;
    for (const auto& [key, _] : object_->items()) {
      if (!used_.contains(key)) config_error("unknown key '" + key + "' in section '" + name_ + "'");
    }
  }

  std::string where(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  const json* object_ = nullptr;
  std::set<std::string> used_;
};

template <typename Parse>
auto with_kind_errors(const std::string& where, Parse&& parse) {
  try {
    return parse();
  } catch (const Error& e) {
    config_error(where + ": " + e.detail());
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) config_error("config must be a JSON object");
  static const std::set<std::string> kSections = {"dataset", "partition", "architecture", "learner",
                                                  "aggregator", "attack", "run"};
  for (const auto& [key, _] : root.items()) {
    if (!kSections.contains(key)) config_error("unknown section '" + key + "'");
  }

  ExperimentConfig config;

  Section ds(root, "dataset");
  auto& d = config.dataset;
  d.source = ds.value_or<std::string>("source", d.source);
  if (d.source != "blobs" && d.source != "csv") config_error("dataset.source must be \"blobs\" or \"csv\"");
  d.n_samples = ds.value_or<std::size_t>("n_samples", d.n_samples);
  d.n_features = ds.value_or<std::size_t>("n_features", d.n_features);
  d.n_classes = ds.value_or<std::size_t>("n_classes", d.n_classes);
  d.class_separation = ds.value_or<double>("class_separation", d.class_separation);
  d.seed = ds.value_or<std::uint64_t>("seed", d.seed);
  d.path = ds.value_or<std::string>("path", d.path);
  d.label_column = ds.optional<std::string>("label_column");
  d.has_header = ds.value_or<bool>("has_header", d.has_header);
  if (d.source == "csv" && d.path.empty()) config_error("dataset.path is required for csv sources");
  ds.finish();

  Section ps(root, "partition");
  auto& p = config.partition;
  p.seed = ps.value_or<std::uint64_t>("seed", p.seed);
  p.n_nodes = ps.value_or<std::size_t>("n_nodes", p.n_nodes);
  p.node_ids = ps.optional<std::vector<std::string>>("node_ids");
  p.replacement = ps.value_or<bool>("replacement", p.replacement);
  p.weights = ps.optional<std::vector<double>>("weights");
  p.weights_per_class = ps.optional<std::vector<std::vector<double>>>("weights_per_class");
  p.features_per_node = ps.optional<std::vector<std::size_t>>("features_per_node");
  p.keep_labels = ps.optional<std::vector<bool>>("keep_labels");
  ps.finish();

  Section as(root, "architecture");
  auto& a = config.architecture;
  a.kind = as.value_or<std::string>("kind", a.kind);
  if (a.kind != "client_server" && a.kind != "p2p") {
    config_error("architecture.kind must be \"client_server\" or \"p2p\"");
  }
  a.server_id = as.value_or<std::string>("server_id", a.server_id);
  a.node_ids = as.optional<std::vector<std::string>>("node_ids");
  as.finish();

  Section ls(root, "learner");
  auto& l = config.learner;
  if (auto kind = ls.optional<std::string>("kind")) {
    l.kind = with_kind_errors("learner.kind", [&] { return parse_learner_kind(*kind); });
  }
  l.n_features = ls.optional<std::size_t>("n_features");
  l.l2 = ls.value_or<double>("l2", l.l2);
  l.lr = ls.value_or<double>("lr", l.lr);
  l.epochs = ls.value_or<std::size_t>("epochs", l.epochs);
  l.batch_size = ls.value_or<std::size_t>("batch_size", l.batch_size);
  l.seed = ls.value_or<std::uint64_t>("seed", l.seed);
  ls.finish();

  Section gs(root, "aggregator");
  auto& g = config.aggregator;
  if (auto kind = gs.optional<std::string>("kind")) {
    g.kind = with_kind_errors("aggregator.kind", [&] { return parse_aggregator_kind(*kind); });
  }
  g.clip_norm = gs.optional<double>("clip_norm");
  g.trim_fraction = gs.optional<double>("trim_fraction");
  g.weights = gs.optional<std::vector<double>>("weights");
  g.size_weighted = gs.value_or<bool>("size_weighted", g.size_weighted);
  g.seed = gs.value_or<std::uint64_t>("seed", g.seed);
  gs.finish();
  with_kind_errors("aggregator", [&] {
    validate(g);
    return 0;
  });

  Section ks(root, "attack");
  if (ks.present()) {
    AttackSpec atk;
    auto kind = ks.optional<std::string>("kind");
    if (!kind) config_error("attack.kind is required");
    atk.kind = with_kind_errors("attack.kind", [&] { return parse_attack_kind(*kind); });
    atk.attacker_ids = ks.value_or<std::vector<std::string>>("attacker_ids", {});
    if (const json* flips = ks.raw("flip_map")) {
      if (!flips->is_object()) config_error("attack.flip_map must be an object of class -> class");
      for (const auto& [from, to] : flips->items()) {
        std::int64_t key = 0;
        try {
          std::size_t used = 0;
          key = std::stoll(from, &used);
          if (used != from.size()) throw std::invalid_argument(from);
        } catch (const std::exception&) {
          config_error("attack.flip_map key '" + from + "' is not an integer class");
        }
        if (!to.is_number_integer()) config_error("attack.flip_map value for '" + from + "' must be an integer");
        atk.flip_map[key] = to.get<std::int64_t>();
      }
    }
    atk.scale = ks.value_or<double>("scale", atk.scale);
    atk.seed = ks.value_or<std::uint64_t>("seed", atk.seed);
    ks.finish();
    config.attack = std::move(atk);
  }

  Section rs(root, "run");
  auto& r = config.run;
  r.rounds = rs.value_or<std::size_t>("rounds", r.rounds);
  r.clients_per_round = rs.optional<std::size_t>("clients_per_round");
  r.round_seed = rs.value_or<std::uint64_t>("round_seed", r.round_seed);
  r.test_fraction = rs.value_or<double>("test_fraction", r.test_fraction);
  if (!(r.test_fraction >= 0.0 && r.test_fraction < 1.0)) config_error("run.test_fraction must lie in [0, 1)");
  rs.finish();

  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

std::string dump_experiment_config(const ExperimentConfig& config) {
  json root;
  auto put_optional = [](json& obj, const char* key, const auto& value) {
    if (value) obj[key] = *value;
  };

  const auto& d = config.dataset;
  json& ds = root["dataset"];
  ds["source"] = d.source;
  ds["n_samples"] = d.n_samples;
  ds["n_features"] = d.n_features;
  ds["n_classes"] = d.n_classes;
  ds["class_separation"] = d.class_separation;
  ds["seed"] = d.seed;
  ds["path"] = d.path;
  put_optional(ds, "label_column", d.label_column);
  ds["has_header"] = d.has_header;

  const auto& p = config.partition;
  json& ps = root["partition"];
  ps["seed"] = p.seed;
  ps["n_nodes"] = p.n_nodes;
  put_optional(ps, "node_ids", p.node_ids);
  ps["replacement"] = p.replacement;
  put_optional(ps, "weights", p.weights);
  put_optional(ps, "weights_per_class", p.weights_per_class);
  put_optional(ps, "features_per_node", p.features_per_node);
  put_optional(ps, "keep_labels", p.keep_labels);

  const auto& a = config.architecture;
  json& as = root["architecture"];
  as["kind"] = a.kind;
  as["server_id"] = a.server_id;
  put_optional(as, "node_ids", a.node_ids);

  const auto& l = config.learner;
  json& ls = root["learner"];
  ls["kind"] = std::string(to_string(l.kind));
  put_optional(ls, "n_features", l.n_features);
  ls["l2"] = l.l2;
  ls["lr"] = l.lr;
  ls["epochs"] = l.epochs;
  ls["batch_size"] = l.batch_size;
  ls["seed"] = l.seed;

  const auto& g = config.aggregator;
  json& gs = root["aggregator"];
  gs["kind"] = std::string(to_string(g.kind));
  put_optional(gs, "clip_norm", g.clip_norm);
  put_optional(gs, "trim_fraction", g.trim_fraction);
  put_optional(gs, "weights", g.weights);
  gs["size_weighted"] = g.size_weighted;
  gs["seed"] = g.seed;

  if (config.attack) {
    const auto& atk = *config.attack;
    json& ks = root["attack"];
    ks["kind"] = std::string(to_string(atk.kind));
    ks["attacker_ids"] = atk.attacker_ids;
    json flips = json::object();
    for (const auto& [from, to] : atk.flip_map) flips[std::to_string(from)] = to;
    ks["flip_map"] = flips;
    ks["scale"] = atk.scale;
    ks["seed"] = atk.seed;
  }

  const auto& r = config.run;
  json& rs = root["run"];
  rs["rounds"] = r.rounds;
  put_optional(rs, "clients_per_round", r.clients_per_round);
  rs["round_seed"] = r.round_seed;
  rs["test_fraction"] = r.test_fraction;

  return root.dump(2) + "\n";
}

void apply_seed_override(ExperimentConfig& config, std::uint64_t seed) {
  config.partition.seed = seed;
  config.run.round_seed = seed;
}

namespace {

template <typename Step>
auto in_module(const char* module, Step&& step) {
  try {
    return step();
  } catch (const Error& e) {
    throw e.with_context(module);
  }
}

Dataset load_source(const DatasetSection& d, const std::filesystem::path& base_dir) {
  if (d.source == "csv") {
    std::filesystem::path path = d.path;
    if (path.is_relative()) path = base_dir / path;
    return load_csv(path, CsvOptions{d.label_column, d.has_header});
  }
  return generate_blobs(d.n_samples, d.n_features, d.n_classes, d.class_separation, d.seed);
}

FlexActors build_actors(const ArchitectureSection& a, const FedDatasetConfig& partition) {
  auto ids = a.node_ids ? *a.node_ids : partition.resolved_node_ids();
  if (a.kind == "p2p") return p2p_architecture(ids);
  return client_server_architecture(ids, a.server_id);
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& config, const std::filesystem::path& base_dir) {
  Dataset source = in_module("dataset", [&] { return load_source(config.dataset, base_dir); });
  if (config.run.test_fraction == 0.0) return {source, source};
  auto [train, test] = in_module("dataset", [&] {
    return train_test_split(source, config.run.test_fraction, derive_seed(config.partition.seed, {kTestSplitStream}));
  });
  return {std::move(train), std::move(test)};
}

PreparedRun prepare_run(const ExperimentConfig& config, const std::filesystem::path& base_dir) {
  auto data = prepare_data(config, base_dir);
  FedDataset fed = in_module("partition", [&] { return from_config(data.train, config.partition); });
  FlexActors actors = in_module("architecture", [&] { return build_actors(config.architecture, config.partition); });
  FlexPool pool = in_module("architecture", [&] { return FlexPool::create(fed, actors); });

  return in_module("run", [&] {
    FlexPool servers = pool.servers();
    if (servers.size() != 1) {
      throw Error(ErrorCode::MultipleServers,
                  "a run needs exactly one server-aggregator; the " + config.architecture.kind +
                      " architecture has " + std::to_string(servers.size()));
    }
    const std::string server_id = servers.actor_ids().front();
    std::optional<std::vector<std::int64_t>> feature_ids;
    std::size_t n_clients = 0;
    for (const auto& id : pool.clients().actor_ids()) {
      if (id == server_id) continue;
      ++n_clients;
      const Dataset* d = pool.data(id);
      if (d == nullptr) continue;
      if (!d->has_labels()) {
        throw Error(ErrorCode::LabelsRequired, "client '" + id + "' holds no labels and cannot train");
      }
      if (!feature_ids) {
        feature_ids = d->feature_ids();
      } else if (*feature_ids != d->feature_ids()) {
        throw Error(ErrorCode::ShapeMismatch, "clients do not share one feature space (client '" + id + "')");
      }
    }
    if (!feature_ids) feature_ids = data.train.feature_ids();

    LearnerSpec spec;
    spec.kind = config.learner.kind;
    spec.n_features = feature_ids->size();
    if (config.learner.n_features && *config.learner.n_features != spec.n_features) {
      throw Error(ErrorCode::ShapeMismatch, "learner.n_features is " + std::to_string(*config.learner.n_features) +
                                                " but clients hold " + std::to_string(spec.n_features) + " features");
    }
    spec.l2 = config.learner.l2;
    spec.lr = config.learner.lr;
    spec.epochs = config.learner.epochs;
    spec.batch_size = config.learner.batch_size;
    spec.seed = config.learner.seed;
    in_module("learner", [&] {
      validate(spec);
      return 0;
    });

    // The test set lives in the clients' feature space.
    std::vector<std::size_t> rows(data.test.n_samples());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::unordered_map<std::int64_t, std::size_t> position;
    for (std::size_t c = 0; c < data.test.n_features(); ++c) position[data.test.feature_ids()[c]] = c;
    std::vector<std::size_t> cols;
    for (auto fid : *feature_ids) cols.push_back(position.at(fid));
    Dataset test = data.test.subset(rows, cols, true);

    RoundConfig round;
    round.learner = spec;
    round.aggregator = config.aggregator;
    round.rounds = config.run.rounds;
    round.clients_per_round = config.run.clients_per_round.value_or(n_clients);
    round.round_seed = config.run.round_seed;
    if (round.clients_per_round == 0 || round.clients_per_round > n_clients) {
      throw Error(ErrorCode::SelectionTooLarge, "clients_per_round must lie in [1, " + std::to_string(n_clients) + "]");
    }
    if (config.attack) {
      round = in_module("attack", [&] { return attach_attack(round, *config.attack, pool); });
    }
    return PreparedRun{pool, std::move(round), std::move(test)};
  });
}

void write_metrics_csv(const std::vector<RoundReport>& reports, std::ostream& out) {
  out << "round,participants,server_loss,server_accuracy,mean_client_loss\n";
  for (const auto& r : reports) {
    out << r.round_index << ',';
    for (std::size_t i = 0; i < r.participating_ids.size(); ++i) {
      if (i) out << ';';
      out << r.participating_ids[i];
    }
    out << ',' << format_real(r.server_loss) << ',';
    if (r.server_accuracy) out << format_real(*r.server_accuracy);
    out << ',' << format_real(r.mean_client_loss()) << '\n';
  }
}

void write_params(const ParamVector& params, std::ostream& out) {
  out << params.shape_tag << '\n';
  for (double v : params.values) out << format_real(v) << '\n';
}

void write_partition_summary(const FedDataset& fed, const Dataset& source, std::ostream& out) {
  out << "node,class,count,n_features,labels_present\n";
  std::optional<LabelSummary> summary;
  std::unordered_map<std::int64_t, std::int64_t> label_of_row;
  if (source.is_classification()) {
    summary = summarize_labels(source);
    const auto& labels = source.class_labels();
    for (std::size_t r = 0; r < source.n_samples(); ++r) label_of_row[source.row_ids()[r]] = labels[r];
  }
  for (const auto& [id, d] : fed) {
    const int labeled = d.has_labels() ? 1 : 0;
    if (summary) {
      std::map<std::int64_t, std::size_t> counts;
      for (auto row_id : d.row_ids()) ++counts[label_of_row.at(row_id)];
      for (auto cls : summary->classes) {
        out << id << ',' << cls << ',' << counts[cls] << ',' << d.n_features() << ',' << labeled << '\n';
      }
    }
    out << id << ",*," << d.n_samples() << ',' << d.n_features() << ',' << labeled << '\n';
  }
}

namespace {

int report_failure(const Error& e, bool validation_phase, std::ostream& err) {
  err << "flexsim: " << e.what() << '\n';
  return validation_phase && is_validation_error(e.code()) ? 2 : 1;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            std::optional<std::uint64_t> seed_override, std::ostream& err) {
  ExperimentConfig config;
  std::optional<PreparedRun> prepared;
  try {
    config = load_experiment_config(config_path);
    if (seed_override) apply_seed_override(config, *seed_override);
    prepared.emplace(prepare_run(config, config_path.parent_path()));
  } catch (const Error& e) {
    return report_failure(e, true, err);
  }

  try {
    auto reports = run_rounds(prepared->pool, prepared->round, prepared->test);
    const std::string server = prepared->pool.servers().actor_ids().front();
    const FlexModel& model = prepared->pool.model(server);
    ParamVector final_params = model.contains(keys::kParams) ? model.get<ParamVector>(keys::kParams)
                                                             : init_params(prepared->round.learner);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());
    std::ostringstream metrics;
    write_metrics_csv(reports, metrics);
    write_file(out_dir / "metrics.csv", metrics.str());
    std::ostringstream params;
    write_params(final_params, params);
    write_file(out_dir / "final_params.txt", params.str());
    write_file(out_dir / "resolved_config.json", dump_experiment_config(config));
  } catch (const Error& e) {
    return report_failure(e, false, err);
  } catch (const std::exception& e) {
    err << "flexsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int cmd_partition_inspect(const std::filesystem::path& config_path, const std::filesystem::path& out_path,
                          std::ostream& err) {
  ExperimentConfig config;
  std::optional<PreparedData> data;
  FedDataset fed;
  try {
    config = load_experiment_config(config_path);
    data.emplace(prepare_data(config, config_path.parent_path()));
    fed = in_module("partition", [&] { return from_config(data->train, config.partition); });
  } catch (const Error& e) {
    return report_failure(e, true, err);
  }
  try {
    std::ostringstream summary;
    write_partition_summary(fed, data->train, summary);
    if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
    write_file(out_path, summary.str());
  } catch (const Error& e) {
    return report_failure(e, false, err);
  } catch (const std::exception& e) {
    err << "flexsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace flexsim
