#include "brainnav/perception.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace brainnav {

namespace {

constexpr const char* kViewNames[4] = {"front", "right", "back", "left"};

std::string caption_for(int view, const ViewObservation& v) {
  std::ostringstream os;
  os << kViewNames[view] << ": ";
  if (v.traversable) {
    os << "walkable";
    if (!v.path_nodes.empty()) os << " for " << v.path_nodes.size() << " places";
  } else {
    os << "blocked";
  }
  if (!v.objects.empty()) {
    os << "; sees ";
    for (std::size_t i = 0; i < v.objects.size(); ++i) {
      os << (i ? ", " : "") << v.objects[i].label << " at " << std::fixed << std::setprecision(1)
         << v.objects[i].distance << " cells";
    }
  }
  return os.str();
}

/// The JSON object embedded in a model reply (first '{' to last '}').
std::optional<nlohmann::json> embedded_json(const std::string& reply) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
  try {
    return nlohmann::json::parse(reply.substr(open, close - open + 1));
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

constexpr int kMalformedLimit = 2;

/// Sends the stage request until `parse` accepts a reply. Gives up with
/// nullopt after kMalformedLimit unparseable replies; transport failures get
/// `retry.max_retries` retries and throw PerceptionUnavailable if no reply
/// ever arrived.
template <typename T>
std::optional<T> run_stage(ChatClient& client, const std::vector<ChatMessage>& messages, const RetryPolicy& retry,
                           const std::function<std::optional<T>(const nlohmann::json&)>& parse) {
  auto backoff = retry.backoff;
  int malformed = 0;
  int transport_failures = 0;
  while (true) {
    std::string reply;
    try {
      reply = client.complete(messages);
    } catch (const TransportError& e) {
      if (++transport_failures > retry.max_retries) {
        if (malformed == 0) throw PerceptionUnavailable(std::string("vision model unavailable: ") + e.what());
        return std::nullopt;
      }
      if (backoff.count() > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      continue;
    }
    if (const auto doc = embedded_json(reply)) {
      if (auto value = parse(*doc)) return value;
    }
    if (++malformed >= kMalformedLimit) return std::nullopt;
  }
}

}  // namespace

std::string SemanticObservation::digest() const {
  std::ostringstream os;
  constexpr char kTags[4] = {'F', 'R', 'B', 'L'};
  for (int i = 0; i < 4; ++i) {
    const auto& v = views[i];
    os << (i ? " " : "") << kTags[i] << ':';
    if (v.traversable) {
      os << "open" << v.path_nodes.size();
    } else {
      os << "blocked";
    }
    if (!v.objects.empty()) {
      os << '[';
      for (std::size_t j = 0; j < v.objects.size(); ++j) {
        os << (j ? ";" : "") << v.objects[j].label << '@' << std::fixed << std::setprecision(1) << v.objects[j].distance;
      }
      os << ']';
    }
  }
  if (warning) os << " !warn";
  return os.str();
}

SemanticObservation perceive(const GridWorld& world, const AgentPose& pose, CoordinateMap& cmap,
                             const PerceptorConfig& cfg) {
  SemanticObservation obs;
  for (int i = 0; i < 4; ++i) {
    const Heading view = pose.heading.rotated(90 * i);
    auto& v = obs.views[i];
    for (const auto& seen : visible_objects(world, pose, view, cfg.range)) {
      double d = seen.distance;
      if (cfg.noise == DistanceNoise::UniformOneCell) {
        const auto draw = mix64(cfg.seed ^ mix64(static_cast<std::uint64_t>(i) * 1000003u + v.objects.size()));
        d += static_cast<double>(static_cast<int>(draw % 3) - 1);
        d = std::clamp(d, 1.0, static_cast<double>(cfg.range));
      }
      v.objects.push_back({seen.label, d});
    }
    Cell c = pose.cell + view.offset();
    v.traversable = world.is_open(c);
    for (int step = 0; step < cfg.range && world.is_open(c); ++step) {
      v.path_nodes.push_back(cmap.node_id_for(c));
      c = c + view.offset();
    }
    v.caption = caption_for(i, v);
  }
  return obs;
}

std::string object_list_prompt() {
  return "You are the visual perception module of a mobile robot. The four images were captured facing "
         "front, right, back and left, in that order. Stage 1 (object recognition): list the salient objects "
         "visible in each image. Reply with JSON only: {\"objects\": [[...front], [...right], [...back], "
         "[...left]]} using short lowercase noun phrases.";
}

std::string traversability_prompt() {
  return "Stage 2 (traversable area labeling): for each of the same four images, answer whether the floor "
         "directly ahead is walkable (free floor or a walkable corridor with no obstacle). Reply with JSON "
         "only: {\"traversable\": [front, right, back, left]} using true or false.";
}

std::string distance_prompt(const std::array<std::vector<std::string>, 4>& labels) {
  std::ostringstream os;
  os << "Stage 3 (relative distance estimation): estimate how far each listed object is from the robot, in "
        "grid cells of 0.5 m.\n";
  for (int i = 0; i < 4; ++i) {
    os << kViewNames[i] << ": ";
    for (std::size_t j = 0; j < labels[i].size(); ++j) os << (j ? ", " : "") << labels[i][j];
    os << '\n';
  }
  os << "Reply with JSON only: {\"distances\": [[...], [...], [...], [...]]} with one number per listed object, "
        "in the same order.";
  return os.str();
}

SemanticObservation perceive_remote(const std::array<ImageFrame, 4>& frames, ChatClient& client,
                                    const RetryPolicy& retry) {
  for (const auto& f : frames) {
    if (f.bytes.empty()) throw std::invalid_argument("perceive_remote: empty image payload");
  }
  std::vector<ChatMessage> messages{{"user", object_list_prompt(), {frames.begin(), frames.end()}}};
  SemanticObservation obs;

  using Labels = std::array<std::vector<std::string>, 4>;
  const auto labels = run_stage<Labels>(client, messages, retry, [](const nlohmann::json& doc) -> std::optional<Labels> {
    if (!doc.contains("objects") || !doc["objects"].is_array() || doc["objects"].size() != 4) return std::nullopt;
    Labels out;
    for (int i = 0; i < 4; ++i) {
      const auto& arr = doc["objects"][i];
      if (!arr.is_array()) return std::nullopt;
      for (const auto& l : arr) {
        if (!l.is_string() || l.get<std::string>().empty()) return std::nullopt;
        out[i].push_back(l.get<std::string>());
      }
    }
    return out;
  });
  if (!labels) obs.warning = true;

  messages.push_back({"assistant", "(object list received)", {}});
  messages.push_back({"user", traversability_prompt(), {}});
  using Flags = std::array<std::optional<bool>, 4>;
  const auto flags = run_stage<Flags>(client, messages, retry, [](const nlohmann::json& doc) -> std::optional<Flags> {
    if (!doc.contains("traversable") || !doc["traversable"].is_array() || doc["traversable"].size() != 4) {
      return std::nullopt;
    }
    Flags out;
    for (int i = 0; i < 4; ++i) {
      if (doc["traversable"][i].is_boolean()) out[i] = doc["traversable"][i].get<bool>();
    }
    return out;
  });
  for (int i = 0; i < 4; ++i) {
    const std::optional<bool> f = flags ? (*flags)[i] : std::nullopt;
    if (!f) obs.warning = true;
    obs.views[i].traversable = f.value_or(false);
  }

  if (labels) {
    messages.push_back({"assistant", "(traversability received)", {}});
    messages.push_back({"user", distance_prompt(*labels), {}});
    using Dists = std::array<std::vector<double>, 4>;
    const auto dists = run_stage<Dists>(client, messages, retry, [&](const nlohmann::json& doc) -> std::optional<Dists> {
      if (!doc.contains("distances") || !doc["distances"].is_array() || doc["distances"].size() != 4) {
        return std::nullopt;
      }
      Dists out;
      for (int i = 0; i < 4; ++i) {
        const auto& arr = doc["distances"][i];
        if (!arr.is_array() || arr.size() != (*labels)[i].size()) return std::nullopt;
        for (const auto& d : arr) {
          if (!d.is_number() || !std::isfinite(d.get<double>()) || d.get<double>() < 0) return std::nullopt;
          out[i].push_back(std::max(1.0, d.get<double>()));
        }
      }
      return out;
    });
    if (dists) {
      for (int i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < (*labels)[i].size(); ++j) {
          obs.views[i].objects.push_back({(*labels)[i][j], (*dists)[i][j]});
        }
      }
    } else {
      obs.warning = true;
    }
  }
  for (int i = 0; i < 4; ++i) obs.views[i].caption = caption_for(i, obs.views[i]);
  return obs;
}

SemanticObservation perceive_remote(const std::array<ImageFrame, 4>& frames, const RemoteModelEndpoint& endpoint,
                                    const RetryPolicy& retry) {
  HttpChatClient client(endpoint);
  return perceive_remote(frames, client, retry);
}

}  // namespace brainnav
