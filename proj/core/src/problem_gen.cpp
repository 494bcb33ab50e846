#include "gridroute/problem_gen.hpp"

#include <algorithm>

#include "gridroute/error.hpp"
#include "gridroute/rng.hpp"

namespace gridroute {

namespace {
constexpr std::uint64_t kTrainStream = 0x747261696eULL;  // "train"
constexpr std::uint64_t kEvalStream = 0x6576616cULL;     // "eval"
constexpr std::uint64_t kTopBit = std::uint64_t{1} << 63;
}  // namespace

ProblemInstance generate(const GeneratorConfig& config) {
  ProblemInstance instance;
  instance.rows = config.rows;
  instance.cols = config.cols;
  instance.walls = config.walls;
  instance.depot = config.depot;
  instance.num_agents = config.num_agents;
  canonicalize(instance);
  validate_instance(instance);
  if (config.num_landmarks < 0) throw ValidationError("num_landmarks must be non-negative");

  std::vector<Cell> eligible;
  for (Cell c = 0; c < instance.cell_count(); ++c) {
    if (c != instance.depot && !instance.is_wall(c)) eligible.push_back(c);
  }
  const auto k = static_cast<std::size_t>(config.num_landmarks);
  if (k > eligible.size()) {
    throw ValidationError("not enough free cells for " + std::to_string(k) + " landmarks");
  }

  // Partial Fisher-Yates: the first k slots form the sample, in draw order.
  Rng rng(config.seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  instance.landmarks.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(k));
  return instance;
}

std::uint64_t training_instance_seed(std::uint64_t master_seed, int problem_index) {
  return derive_seed(derive_seed(master_seed, kTrainStream), static_cast<std::uint64_t>(problem_index)) &
         ~kTopBit;
}

std::uint64_t evaluation_instance_seed(std::uint64_t eval_seed, int instance_index) {
  return derive_seed(derive_seed(eval_seed, kEvalStream), static_cast<std::uint64_t>(instance_index)) |
         kTopBit;
}

nlohmann::json instance_to_json(const ProblemInstance& instance) {
  ProblemInstance canonical = instance;
  canonicalize(canonical);
  nlohmann::json doc{{"rows", canonical.rows},
                     {"cols", canonical.cols},
                     {"walls", canonical.walls},
                     {"depot", canonical.depot},
                     {"landmarks", canonical.landmarks},
                     {"num_agents", canonical.num_agents}};
  if (canonical.name) doc["name"] = *canonical.name;
  return doc;
}

ProblemInstance instance_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("instance document must be a JSON object");
  ProblemInstance instance;
  try {
    instance.rows = doc.at("rows").get<int>();
    instance.cols = doc.at("cols").get<int>();
    instance.walls = doc.at("walls").get<std::vector<Cell>>();
    instance.depot = doc.at("depot").get<Cell>();
    instance.landmarks = doc.at("landmarks").get<std::vector<Cell>>();
    instance.num_agents = doc.at("num_agents").get<int>();
    if (doc.contains("name")) instance.name = doc.at("name").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed instance document: ") + e.what());
  }
  canonicalize(instance);
  validate_instance(instance);
  return instance;
}

std::string serialize_instance(const ProblemInstance& instance) {
  return instance_to_json(instance).dump(2) + "\n";
}

ProblemInstance parse_instance(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed instance document: ") + e.what());
  }
  return instance_from_json(doc);
}

}  // namespace gridroute
