#pragma once

// Algorithmic subjects that play the wire protocol: a fair-coin guesser for
// calibrating the null, and a feedback-driven discriminator that learns which
// direction of a chart statistic marks the real chart.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chartduel/engine.hpp"
#include "chartduel/features.hpp"
#include "chartduel/random.hpp"
#include "chartduel/stream.hpp"

namespace chartduel::bots {

enum class Orientation { kUnknown, kHigherIsReal, kLowerIsReal };

/// Evidence needed (net trials agreeing) before the bot commits to an orientation.
inline constexpr int kOrientationThreshold = 2;
/// Statistics closer than this are a tie and resolved by a coin flip.
inline constexpr double kTieTolerance = 1e-12;

struct BotPolicy {
  std::string name;
  Feature feature = Feature::kLag1Autocorrelation;
  Orientation orientation = Orientation::kUnknown;
  int evidence = 0;  // +1 per trial where the real chart had the higher statistic
  SplitMix64 rng;
  std::optional<std::pair<double, double>> last_stats;  // (top, bottom) at the last guess

  static BotPolicy make(std::string name, Feature feature, std::uint64_t seed);
};

engine::Slot coin_bot_guess(SplitMix64& rng);

/// Picks the chart whose statistic is higher/lower per the current orientation;
/// a coin flip while the orientation is unknown or the statistics tie.
engine::Slot learning_bot_guess(BotPolicy& policy, std::span<const double> top_returns,
                                std::span<const double> bottom_returns);

/// Moves the evidence tally toward the orientation the feedback supports; the
/// orientation switches once the tally reaches +/-kOrientationThreshold.
void learning_bot_update(BotPolicy& policy, engine::Slot real_slot);

/// Decides when and how a bot guesses inside a trial.
class GuessStrategy {
 public:
  virtual ~GuessStrategy() = default;
  /// Called at trial start and after every complete tick pair with the prices
  /// revealed so far (base price first). Return a slot to guess now.
  virtual std::optional<engine::Slot> on_points(std::span<const double> top_prices,
                                                std::span<const double> bottom_prices,
                                                std::uint32_t points_per_chart) = 0;
  virtual void on_feedback(engine::Slot real_slot) { (void)real_slot; }
};

/// Guesses uniformly once `guess_at_point` pairs are visible (0 = at trial start).
class CoinStrategy : public GuessStrategy {
 public:
  explicit CoinStrategy(std::uint64_t seed, std::uint32_t guess_at_point = 1)
      : rng_(seed), guess_at_point_(guess_at_point) {}
  std::optional<engine::Slot> on_points(std::span<const double> top,
                                        std::span<const double> bottom,
                                        std::uint32_t points_per_chart) override;

 private:
  SplitMix64 rng_;
  std::uint32_t guess_at_point_;
};

/// Waits for the full chart, then applies learning_bot_guess. With
/// `use_feedback` false the policy is never updated.
class LearningStrategy : public GuessStrategy {
 public:
  LearningStrategy(BotPolicy policy, bool use_feedback = true)
      : policy_(std::move(policy)), use_feedback_(use_feedback) {}
  std::optional<engine::Slot> on_points(std::span<const double> top,
                                        std::span<const double> bottom,
                                        std::uint32_t points_per_chart) override;
  void on_feedback(engine::Slot real_slot) override;
  const BotPolicy& policy() const { return policy_; }

 private:
  BotPolicy policy_;
  bool use_feedback_;
};

/// Skips a trial entirely (lets it time out) with probability `skip_rate`,
/// otherwise defers to `inner`.
class AbstainingStrategy : public GuessStrategy {
 public:
  AbstainingStrategy(std::unique_ptr<GuessStrategy> inner, double skip_rate, std::uint64_t seed)
      : inner_(std::move(inner)), skip_rate_(skip_rate), rng_(seed) {}
  std::optional<engine::Slot> on_points(std::span<const double> top,
                                        std::span<const double> bottom,
                                        std::uint32_t points_per_chart) override;
  void on_feedback(engine::Slot real_slot) override { inner_->on_feedback(real_slot); }

 private:
  std::unique_ptr<GuessStrategy> inner_;
  double skip_rate_;
  SplitMix64 rng_;
  bool decided_ = false;
  bool skipping_ = false;
};

struct BotClientOptions {
  std::string subject_id;
  std::string contest_id;
  bool practice = false;
  stats::Profession profession = stats::Profession::kUndeclared;
};

/// Per-trial result seen by a bot: 1 correct, 0 incorrect, -1 timeout.
struct BotRecord {
  std::string session_id;
  std::vector<int> outcomes;
  std::int64_t reported_score = 0;
  std::vector<std::string> errors;
  bool completed = false;

  std::int64_t correct() const;
  std::int64_t answered() const;
  /// Accuracy over trials with index >= warmup (timeouts count as incorrect).
  double accuracy_after(std::size_t warmup) const;
};

/// Protocol client driven by a GuessStrategy.
class BotClient : public stream::ClientEndpoint {
 public:
  BotClient(BotClientOptions options, std::unique_ptr<GuessStrategy> strategy);

  std::vector<std::string> on_connect(engine::TimestampMs now) override;
  std::vector<std::string> on_frame(std::string_view frame, engine::TimestampMs now) override;
  bool finished() const override { return finished_; }

  const BotRecord& record() const { return record_; }
  GuessStrategy& strategy() { return *strategy_; }

 private:
  std::string make(protocol::Kind kind, nlohmann::json body);
  void maybe_guess(std::vector<std::string>& out);

  BotClientOptions options_;
  std::unique_ptr<GuessStrategy> strategy_;
  BotRecord record_;
  std::uint64_t seq_ = 0;
  bool finished_ = false;

  std::string trial_id_;
  std::uint32_t points_per_chart_ = 0;
  std::vector<double> top_;
  std::vector<double> bottom_;
  bool guessed_ = false;
};

}  // namespace chartduel::bots
