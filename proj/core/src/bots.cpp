#include "chartduel/bots.hpp"

#include <cmath>

namespace chartduel::bots {

using engine::Slot;
using protocol::Kind;

namespace {

std::vector<double> differences(std::span<const double> prices) {
  std::vector<double> out;
  if (prices.size() < 2) return out;
  out.reserve(prices.size() - 1);
  for (std::size_t i = 1; i < prices.size(); ++i) out.push_back(prices[i] - prices[i - 1]);
  return out;
}

}  // namespace

BotPolicy BotPolicy::make(std::string name, Feature feature, std::uint64_t seed) {
  BotPolicy p;
  p.name = std::move(name);
  p.feature = feature;
  p.rng = SplitMix64(seed);
  return p;
}

Slot coin_bot_guess(SplitMix64& rng) { return coin_flip(rng) ? Slot::kTop : Slot::kBottom; }

Slot learning_bot_guess(BotPolicy& policy, std::span<const double> top_returns,
                        std::span<const double> bottom_returns) {
  const double top = evaluate(policy.feature, top_returns);
  const double bottom = evaluate(policy.feature, bottom_returns);
  policy.last_stats = {top, bottom};
  if (policy.orientation == Orientation::kUnknown || std::abs(top - bottom) <= kTieTolerance) {
    return coin_bot_guess(policy.rng);
  }
  const bool top_higher = top > bottom;
  const bool pick_higher = policy.orientation == Orientation::kHigherIsReal;
  return top_higher == pick_higher ? Slot::kTop : Slot::kBottom;
}

void learning_bot_update(BotPolicy& policy, Slot real_slot) {
  if (!policy.last_stats) return;
  const auto [top, bottom] = *policy.last_stats;
  policy.last_stats.reset();
  if (std::abs(top - bottom) <= kTieTolerance) return;
  const double real = real_slot == Slot::kTop ? top : bottom;
  const double fake = real_slot == Slot::kTop ? bottom : top;
  policy.evidence += real > fake ? 1 : -1;
  if (policy.evidence >= kOrientationThreshold) {
    policy.orientation = Orientation::kHigherIsReal;
  } else if (policy.evidence <= -kOrientationThreshold) {
    policy.orientation = Orientation::kLowerIsReal;
  }
}

std::optional<Slot> CoinStrategy::on_points(std::span<const double> top,
                                            std::span<const double> /*bottom*/,
                                            std::uint32_t points_per_chart) {
  const auto visible = static_cast<std::uint32_t>(top.size() - 1);
  if (visible >= std::min(guess_at_point_, points_per_chart)) return coin_bot_guess(rng_);
  return std::nullopt;
}

std::optional<Slot> LearningStrategy::on_points(std::span<const double> top,
                                                std::span<const double> bottom,
                                                std::uint32_t points_per_chart) {
  if (top.size() - 1 < points_per_chart) return std::nullopt;
  return learning_bot_guess(policy_, differences(top), differences(bottom));
}

void LearningStrategy::on_feedback(Slot real_slot) {
  if (use_feedback_) {
    learning_bot_update(policy_, real_slot);
  } else {
    policy_.last_stats.reset();
  }
}

std::optional<Slot> AbstainingStrategy::on_points(std::span<const double> top,
                                                  std::span<const double> bottom,
                                                  std::uint32_t points_per_chart) {
  if (top.size() == 1) {
    decided_ = true;
    skipping_ = uniform_unit(rng_) < skip_rate_;
  }
  if (skipping_) return std::nullopt;
  return inner_->on_points(top, bottom, points_per_chart);
}

std::int64_t BotRecord::correct() const {
  std::int64_t n = 0;
  for (int o : outcomes) n += o == 1;
  return n;
}

std::int64_t BotRecord::answered() const {
  std::int64_t n = 0;
  for (int o : outcomes) n += o >= 0;
  return n;
}

double BotRecord::accuracy_after(std::size_t warmup) const {
  if (outcomes.size() <= warmup) return 0.0;
  std::int64_t hits = 0;
  for (std::size_t i = warmup; i < outcomes.size(); ++i) hits += outcomes[i] == 1;
  return static_cast<double>(hits) / static_cast<double>(outcomes.size() - warmup);
}

BotClient::BotClient(BotClientOptions options, std::unique_ptr<GuessStrategy> strategy)
    : options_(std::move(options)), strategy_(std::move(strategy)) {}

std::string BotClient::make(Kind kind, nlohmann::json body) {
  return protocol::encode({kind, ++seq_, std::move(body)});
}

std::vector<std::string> BotClient::on_connect(engine::TimestampMs) {
  nlohmann::json hello = {{"subject_id", options_.subject_id}};
  if (options_.profession != stats::Profession::kUndeclared) {
    hello["profession"] = stats::to_string(options_.profession);
  }
  return {make(Kind::kHello, std::move(hello))};
}

void BotClient::maybe_guess(std::vector<std::string>& out) {
  if (guessed_ || trial_id_.empty()) return;
  if (auto choice = strategy_->on_points(top_, bottom_, points_per_chart_)) {
    guessed_ = true;
    out.push_back(make(Kind::kGuess, {{"trial_id", trial_id_}, {"choice", engine::to_string(*choice)}}));
  }
}

std::vector<std::string> BotClient::on_frame(std::string_view frame, engine::TimestampMs) {
  std::vector<std::string> out;
  protocol::Message m;
  try {
    m = protocol::decode(frame, protocol::Direction::kServerToClient);
  } catch (const protocol::ProtocolError& e) {
    record_.errors.push_back(e.what());
    finished_ = true;
    return out;
  }
  switch (m.kind) {
    case Kind::kContestList:
      out.push_back(make(Kind::kSessionOpen,
                         {{"contest_id", options_.contest_id}, {"practice", options_.practice}}));
      break;
    case Kind::kSessionOpen:
      record_.session_id = m.body["session_id"].get<std::string>();
      break;
    case Kind::kTrialStart:
      trial_id_ = m.body["trial_id"].get<std::string>();
      points_per_chart_ = m.body["points_per_chart"].get<std::uint32_t>();
      top_.assign(1, m.body["base_price"].get<double>());
      bottom_.assign(1, top_.front());
      guessed_ = false;
      maybe_guess(out);
      break;
    case Kind::kTick: {
      const double price = m.body["price"].get<double>();
      if (m.body["slot"] == "top") {
        top_.push_back(price);
      } else {
        bottom_.push_back(price);
        if (bottom_.size() == top_.size()) maybe_guess(out);
      }
      break;
    }
    case Kind::kFeedback:
      strategy_->on_feedback(engine::slot_from_string(m.body["real_slot"].get<std::string>()));
      break;
    case Kind::kTrialEnd: {
      const auto outcome = m.body["outcome"].get<std::string>();
      record_.outcomes.push_back(outcome == "correct" ? 1 : outcome == "incorrect" ? 0 : -1);
      trial_id_.clear();
      break;
    }
    case Kind::kSessionEnd:
      record_.reported_score = m.body["score"].get<std::int64_t>();
      record_.completed = true;
      finished_ = true;
      break;
    case Kind::kError:
      record_.errors.push_back(m.body["message"].get<std::string>());
      if (m.body["fatal"].get<bool>() || m.body["code"] == protocol::kErrRejected) {
        // A rejected session_open (contest full, closed) ends the bot's run.
        if (record_.session_id.empty() || m.body["fatal"].get<bool>()) finished_ = true;
      }
      break;
    default:
      break;
  }
  return out;
}

}  // namespace chartduel::bots
