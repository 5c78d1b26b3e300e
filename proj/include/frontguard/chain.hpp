#pragma once

// A toy ledger: a mempool, blocks built with fast-transaction front-running,
// target contracts that accept messages directly or through commit-reveal,
// and container contracts that hide who committed to what.
//
// One Chain is one episode. It is single-threaded and owns its RNG.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "frontguard/digest.hpp"
#include "frontguard/error.hpp"

namespace frontguard {

using BlockNumber = std::uint64_t;
using TxId = std::size_t;
using TargetId = std::size_t;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // 53 random bits in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n) {
    const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return std::min(i, n - 1);
  }

 private:
  std::mt19937_64 engine_;
};

enum class Period {
  Any,     // commits and reveals both accepted
  Commit,  // commits only
  Open,    // commits, plus direct messages even for protocol payloads
  Reveal,  // reveals of earlier commits only
};

inline const char* to_string(Period p) {
  switch (p) {
    case Period::Any: return "any";
    case Period::Commit: return "commit";
    case Period::Open: return "open";
    case Period::Reveal: return "reveal";
  }
  return "unknown";
}

class PeriodSchedule {
 public:
  enum class Kind { Unrestricted, Alternating, Deadline };

  static PeriodSchedule unrestricted() { return PeriodSchedule{}; }

  // commit_len commit blocks, then reveal_len reveal blocks, repeating from block 0.
  static PeriodSchedule alternating(std::uint64_t commit_len, std::uint64_t reveal_len, bool open_commits = false) {
    if (commit_len == 0 || reveal_len == 0) throw Error("alternating schedule needs positive period lengths");
    PeriodSchedule s;
    s.kind_ = Kind::Alternating;
    s.a_ = commit_len;
    s.b_ = reveal_len;
    s.open_ = open_commits;
    return s;
  }

  // Blocks before `deadline` are commit blocks, the rest reveal blocks.
  static PeriodSchedule deadline(std::uint64_t deadline, bool open_commits = false) {
    PeriodSchedule s;
    s.kind_ = Kind::Deadline;
    s.a_ = deadline;
    s.open_ = open_commits;
    return s;
  }

  Kind kind() const noexcept { return kind_; }
  std::uint64_t commit_length() const noexcept { return a_; }
  std::uint64_t reveal_length() const noexcept { return b_; }
  bool open_commits() const noexcept { return open_; }

  Period period_of(BlockNumber block) const {
    bool commit = true;
    switch (kind_) {
      case Kind::Unrestricted: return Period::Any;
      case Kind::Alternating: commit = block % (a_ + b_) < a_; break;
      case Kind::Deadline: commit = block < a_; break;
    }
    if (!commit) return Period::Reveal;
    return open_ ? Period::Open : Period::Commit;
  }

  bool accepts_commits(BlockNumber block) const { return period_of(block) != Period::Reveal; }
  bool accepts_reveals(BlockNumber block) const {
    const Period p = period_of(block);
    return p == Period::Any || p == Period::Reveal;
  }

  BlockNumber next_reveal_block(BlockNumber from) const {
    for (BlockNumber b = from; b < from + a_ + b_ + 2; ++b)
      if (accepts_reveals(b)) return b;
    return std::max(from, a_);  // deadline schedule
  }
  BlockNumber next_commit_block(BlockNumber from) const {
    for (BlockNumber b = from; b < from + a_ + b_ + 2; ++b)
      if (accepts_commits(b)) return b;
    throw PeriodViolation("no commit block left in the schedule");
  }

 private:
  Kind kind_ = Kind::Unrestricted;
  std::uint64_t a_ = 0;
  std::uint64_t b_ = 0;
  bool open_ = false;
};

inline constexpr std::size_t kCanonicalTemplate = 0;

enum class TxKind { Commit, ContainerCommit, Message };

inline const char* to_string(TxKind k) {
  switch (k) {
    case TxKind::Commit: return "commit";
    case TxKind::ContainerCommit: return "container_commit";
    case TxKind::Message: return "message";
  }
  return "unknown";
}

enum class RevealCheck {
  Valid,
  NoCommit,
  DigestMismatch,
  WrongSender,
  TimestampNotPrior,
  TemplateMismatch,
  CommitOutsidePeriod,
  Expired,
};

inline const char* to_string(RevealCheck r) {
  switch (r) {
    case RevealCheck::Valid: return "Valid";
    case RevealCheck::NoCommit: return "NoCommit";
    case RevealCheck::DigestMismatch: return "DigestMismatch";
    case RevealCheck::WrongSender: return "WrongSender";
    case RevealCheck::TimestampNotPrior: return "TimestampNotPrior";
    case RevealCheck::TemplateMismatch: return "TemplateMismatch";
    case RevealCheck::CommitOutsidePeriod: return "CommitOutsidePeriod";
    case RevealCheck::Expired: return "Expired";
  }
  return "unknown";
}

enum class TxStatus {
  Pending,
  Stored,            // commit recorded at the target
  ContainerCreated,  // container deployed and holding the digest
  Executed,
  AlreadyExecuted,
  InvalidReveal,
  PeriodRejected,
};

inline const char* to_string(TxStatus s) {
  switch (s) {
    case TxStatus::Pending: return "pending";
    case TxStatus::Stored: return "stored";
    case TxStatus::ContainerCreated: return "container_created";
    case TxStatus::Executed: return "executed";
    case TxStatus::AlreadyExecuted: return "already_executed";
    case TxStatus::InvalidReveal: return "invalid_reveal";
    case TxStatus::PeriodRejected: return "period_rejected";
  }
  return "unknown";
}

// Fast inclusion: the transaction pays `fee` and lands ahead of `victim`
// with probability success_prob.
struct Priority {
  std::optional<TxId> victim;
  double fee = 0.0;
  double success_prob = 1.0;
};

struct Transaction {
  TxId id = 0;
  TxKind kind = TxKind::Message;
  Address sender{};
  double fee = 0.0;
  BlockNumber submitted = 0;
  std::optional<Priority> priority;  // set for fast transactions

  std::optional<TargetId> target;  // Commit and Message
  Digest digest{};                 // Commit and ContainerCommit
  std::size_t template_id = kCanonicalTemplate;
  std::optional<BlockNumber> claimed_timestamp;  // honored only by non-canonical templates

  std::string payload;               // Message
  std::optional<TxId> container;     // Message: pointer to the container-commit transaction

  bool fast() const noexcept { return priority.has_value(); }
};

struct TxRecord {
  TxStatus status = TxStatus::Pending;
  std::optional<BlockNumber> included;
  std::size_t position = 0;
  std::optional<RevealCheck> check;
  bool ahead_of_victim = false;
};

struct CommitRecord {
  Digest digest{};
  BlockNumber received_block = 0;
  TxId tx = 0;
};

struct ContainerContract {
  TxId id = 0;  // the container-commit transaction
  Address address{};
  std::size_t template_id = kCanonicalTemplate;
  Digest stored_digest{};
  BlockNumber timestamp_block = 0;
};

struct Execution {
  std::string payload;
  Address sender{};
  BlockNumber block = 0;
  TxId tx = 0;
};

struct TargetConfig {
  std::vector<std::string> protocol_messages;  // payloads that must go through commit-reveal
  PeriodSchedule schedule = PeriodSchedule::unrestricted();
  std::optional<std::uint64_t> commit_validity;  // blocks a commit stays redeemable; unlimited if unset
};

struct TargetContract {
  Address address{};
  TargetConfig config;
  std::vector<CommitRecord> commits;
  std::optional<Execution> executed;

  bool requires_commit(const std::string& payload) const {
    const auto& m = config.protocol_messages;
    return std::find(m.begin(), m.end(), payload) != m.end();
  }
};

struct Block {
  BlockNumber number = 0;
  std::vector<TxId> order;
};

// What an outside observer learns about one transaction.
struct ObservedEvent {
  TxId tx = 0;
  TxKind kind = TxKind::Message;
  BlockNumber submitted = 0;
  std::optional<BlockNumber> included;
  bool fast = false;
  std::optional<Address> sender;
  std::optional<Address> target;
  std::optional<Digest> digest;
  std::optional<std::size_t> template_id;
  std::optional<std::string> payload;
};

struct ChainConfig {
  double c = 1.0;
  double f = 2.0;
  double delay_prob = 0.0;
  bool event_log = false;
};

class Chain {
 public:
  Chain(ChainConfig config, std::uint64_t seed) : config_(config), rng_(seed) {}

  Rng& rng() noexcept { return rng_; }
  const ChainConfig& config() const noexcept { return config_; }
  BlockNumber current_block() const noexcept { return current_; }

  Address new_address() {
    Address a;
    for (std::size_t i = 0; i < a.size(); i += 8) {
      const std::uint64_t word = rng_.next();
      for (std::size_t j = 0; j < 8 && i + j < a.size(); ++j) a[i + j] = static_cast<std::uint8_t>(word >> (8 * j));
    }
    for (const auto& known : addresses_)
      if (known == a) throw EngineFault("fresh address collided with an existing one");
    addresses_.push_back(a);
    return a;
  }

  TargetId add_target(TargetConfig config) {
    TargetContract t;
    t.address = new_address();
    t.config = std::move(config);
    targets_.push_back(std::move(t));
    return targets_.size() - 1;
  }

  const TargetContract& target(TargetId id) const { return targets_.at(id); }
  const std::vector<TargetContract>& targets() const noexcept { return targets_; }
  const std::vector<ContainerContract>& containers() const noexcept { return containers_; }
  const std::vector<Address>& addresses() const noexcept { return addresses_; }

  TxId submit_commit(const Address& sender, TargetId target, const Digest& digest,
                     std::optional<Priority> priority = std::nullopt) {
    if (!targets_.at(target).config.schedule.accepts_commits(current_))
      throw PeriodViolation("commit submitted outside the commit period");
    Transaction tx = make_tx(TxKind::Commit, sender, priority);
    tx.target = target;
    tx.digest = digest;
    return enqueue(std::move(tx));
  }

  TxId submit_container_commit(const Address& sender, const Digest& digest, std::size_t template_id = kCanonicalTemplate,
                               std::optional<BlockNumber> claimed_timestamp = std::nullopt,
                               std::optional<Priority> priority = std::nullopt) {
    Transaction tx = make_tx(TxKind::ContainerCommit, sender, priority);
    tx.digest = digest;
    tx.template_id = template_id;
    tx.claimed_timestamp = claimed_timestamp;
    return enqueue(std::move(tx));
  }

  // A reveal when `payload` is a protocol message, a direct message otherwise.
  TxId submit_message(const Address& sender, TargetId target, std::string payload,
                      std::optional<TxId> container = std::nullopt, std::optional<Priority> priority = std::nullopt) {
    const auto& t = targets_.at(target);
    if (t.requires_commit(payload) && t.config.schedule.period_of(current_) == Period::Commit)
      throw PeriodViolation("protocol message submitted during a commit period");
    Transaction tx = make_tx(TxKind::Message, sender, priority);
    tx.target = target;
    tx.payload = std::move(payload);
    tx.container = container;
    return enqueue(std::move(tx));
  }

  const Transaction& transaction(TxId id) const { return txs_.at(id); }
  const TxRecord& record(TxId id) const { return records_.at(id); }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::size_t pending() const noexcept { return mempool_.size(); }

  double fees_paid(const Address& a) const {
    double total = 0.0;
    for (const auto& b : blocks_)
      for (TxId id : b.order)
        if (txs_[id].sender == a) total += txs_[id].fee;
    return total;
  }

  // Fee paid by `a` in each block it had transactions included in.
  std::vector<std::pair<BlockNumber, double>> fees_by_block(const Address& a) const {
    std::vector<std::pair<BlockNumber, double>> out;
    for (const auto& b : blocks_) {
      double total = 0.0;
      bool any = false;
      for (TxId id : b.order)
        if (txs_[id].sender == a) {
          total += txs_[id].fee;
          any = true;
        }
      if (any) out.emplace_back(b.number, total);
    }
    return out;
  }

  RevealCheck verify_reveal(TargetId target, const Address& sender, const std::string& payload,
                            std::optional<TxId> container) const {
    const auto& t = targets_.at(target);
    if (container) {
      const ContainerContract* box = find_container(*container);
      if (!box) return RevealCheck::NoCommit;
      if (box->template_id != kCanonicalTemplate) return RevealCheck::TemplateMismatch;
      if (box->stored_digest != make_commit(sender, payload, t.address))
        return other_sender_matches(sender, payload, t.address, {box->stored_digest}) ? RevealCheck::WrongSender
                                                                                        : RevealCheck::DigestMismatch;
      return check_timing(t, box->timestamp_block);
    }
    if (t.commits.empty()) return RevealCheck::NoCommit;
    const Digest expected = make_commit(sender, payload);
    std::optional<RevealCheck> best;
    for (const auto& rec : t.commits) {
      if (rec.digest != expected) continue;
      const RevealCheck r = check_timing(t, rec.received_block);
      if (r == RevealCheck::Valid) return r;
      if (!best) best = r;
    }
    if (best) return *best;
    std::vector<Digest> stored;
    for (const auto& rec : t.commits) stored.push_back(rec.digest);
    return other_sender_matches(sender, payload, std::nullopt, stored) ? RevealCheck::WrongSender
                                                                       : RevealCheck::DigestMismatch;
  }

  const Block& build_block() {
    Block block;
    block.number = current_;
    std::vector<TxId> regular, fast_front, remaining;
    std::vector<TxId> fast_waiting;
    for (TxId id : mempool_) {
      const auto& tx = txs_[id];
      if (tx.fast()) continue;
      if (config_.delay_prob > 0.0 && rng_.bernoulli(config_.delay_prob)) remaining.push_back(id);
      else regular.push_back(id);
    }
    auto in_block = [&](TxId victim) { return std::find(regular.begin(), regular.end(), victim) != regular.end(); };
    // victim -> fast transactions aimed at it, in submission order
    std::vector<std::pair<TxId, std::vector<TxId>>> groups;
    for (TxId id : mempool_) {
      const auto& tx = txs_[id];
      if (!tx.fast()) continue;
      const auto& victim = tx.priority->victim;
      if (victim && in_block(*victim)) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == *victim; });
        if (it == groups.end()) groups.push_back({*victim, {id}});
        else it->second.push_back(id);
      } else if (victim && records_[*victim].status == TxStatus::Pending) {
        fast_waiting.push_back(id);
      } else {
        fast_front.push_back(id);
      }
    }

    std::vector<TxId> order = fast_front;
    for (TxId id : regular) {
      auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == id; });
      if (it == groups.end()) {
        order.push_back(id);
        continue;
      }
      auto& contenders = it->second;
      const TxId winner = pick_winner(contenders);
      const bool ahead = rng_.bernoulli(txs_[winner].priority->success_prob);
      std::vector<TxId> losers;
      for (TxId other : contenders)
        if (other != winner) losers.push_back(other);
      std::stable_sort(losers.begin(), losers.end(),
                       [&](TxId a, TxId b) { return txs_[a].priority->fee > txs_[b].priority->fee; });
      if (ahead) {
        records_[winner].ahead_of_victim = true;
        order.push_back(winner);
        order.push_back(id);
      } else {
        order.push_back(id);
        order.push_back(winner);
      }
      order.insert(order.end(), losers.begin(), losers.end());
    }

    remaining.insert(remaining.end(), fast_waiting.begin(), fast_waiting.end());
    std::sort(remaining.begin(), remaining.end());
    mempool_ = std::move(remaining);

    block.order = order;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const TxId id = order[pos];
      records_[id].included = current_;
      records_[id].position = pos;
      apply(id);
      if (config_.event_log) log_event(id);
    }
    blocks_.push_back(std::move(block));
    ++current_;
    return blocks_.back();
  }

  // Everything an outsider sees, in submission order. Transactions sent by
  // `self` are left out.
  std::vector<ObservedEvent> attacker_view(std::optional<Address> self = std::nullopt) const {
    std::vector<ObservedEvent> out;
    for (const auto& tx : txs_) {
      if (self && tx.sender == *self) continue;
      ObservedEvent e;
      e.tx = tx.id;
      e.kind = tx.kind;
      e.submitted = tx.submitted;
      e.included = records_[tx.id].included;
      e.fast = tx.fast();
      switch (tx.kind) {
        case TxKind::Commit:
          e.sender = tx.sender;
          e.target = targets_[*tx.target].address;
          e.digest = tx.digest;
          break;
        case TxKind::ContainerCommit:
          e.template_id = tx.template_id;
          e.digest = tx.digest;
          break;
        case TxKind::Message:
          e.sender = tx.sender;
          e.target = targets_[*tx.target].address;
          e.payload = tx.payload;
          break;
      }
      out.push_back(std::move(e));
    }
    return out;
  }

  const std::vector<std::string>& event_log() const noexcept { return log_; }

 private:
  Transaction make_tx(TxKind kind, const Address& sender, const std::optional<Priority>& priority) {
    Transaction tx;
    tx.id = txs_.size();
    tx.kind = kind;
    tx.sender = sender;
    tx.submitted = current_;
    tx.priority = priority;
    tx.fee = priority ? priority->fee : config_.c;
    return tx;
  }

  TxId enqueue(Transaction tx) {
    const TxId id = tx.id;
    txs_.push_back(std::move(tx));
    records_.emplace_back();
    mempool_.push_back(id);
    return id;
  }

  TxId pick_winner(const std::vector<TxId>& contenders) {
    double top = -1.0;
    for (TxId id : contenders) top = std::max(top, txs_[id].priority->fee);
    std::vector<TxId> tied;
    for (TxId id : contenders)
      if (txs_[id].priority->fee == top) tied.push_back(id);
    if (tied.size() == 1) return tied.front();
    return tied[rng_.index(tied.size())];
  }

  const ContainerContract* find_container(TxId id) const {
    for (const auto& c : containers_)
      if (c.id == id) return &c;
    return nullptr;
  }

  bool other_sender_matches(const Address& sender, const std::string& payload, const std::optional<Address>& target,
                            const std::vector<Digest>& stored) const {
    for (const auto& a : addresses_) {
      if (a == sender) continue;
      const Digest d = make_commit(a, payload, target);
      if (std::find(stored.begin(), stored.end(), d) != stored.end()) return true;
    }
    return false;
  }

  RevealCheck check_timing(const TargetContract& t, BlockNumber received) const {
    if (received >= current_) return RevealCheck::TimestampNotPrior;
    if (!t.config.schedule.accepts_commits(received)) return RevealCheck::CommitOutsidePeriod;
    if (t.config.commit_validity && current_ - received > *t.config.commit_validity) return RevealCheck::Expired;
    return RevealCheck::Valid;
  }

  void apply(TxId id) {
    const Transaction& tx = txs_[id];
    TxRecord& rec = records_[id];
    switch (tx.kind) {
      case TxKind::Commit: {
        auto& t = targets_[*tx.target];
        if (!t.config.schedule.accepts_commits(current_)) {
          rec.status = TxStatus::PeriodRejected;
          return;
        }
        t.commits.push_back({tx.digest, current_, id});
        rec.status = TxStatus::Stored;
        return;
      }
      case TxKind::ContainerCommit: {
        ContainerContract box;
        box.id = id;
        box.address = new_address();
        box.template_id = tx.template_id;
        box.stored_digest = tx.digest;
        box.timestamp_block = current_;
        if (tx.template_id != kCanonicalTemplate && tx.claimed_timestamp) box.timestamp_block = *tx.claimed_timestamp;
        containers_.push_back(box);
        rec.status = TxStatus::ContainerCreated;
        return;
      }
      case TxKind::Message: {
        auto& t = targets_[*tx.target];
        const Period period = t.config.schedule.period_of(current_);
        if (t.requires_commit(tx.payload) && period != Period::Open) {
          if (period == Period::Commit) {
            rec.status = TxStatus::PeriodRejected;
            return;
          }
          rec.check = verify_reveal(*tx.target, tx.sender, tx.payload, tx.container);
          if (*rec.check != RevealCheck::Valid) {
            rec.status = TxStatus::InvalidReveal;
            return;
          }
        }
        if (t.executed) {
          rec.status = TxStatus::AlreadyExecuted;
          return;
        }
        t.executed = Execution{tx.payload, tx.sender, current_, id};
        rec.status = TxStatus::Executed;
        return;
      }
    }
  }

  void log_event(TxId id) {
    const Transaction& tx = txs_[id];
    const TxRecord& rec = records_[id];
    nlohmann::json e;
    e["block"] = current_;
    e["kind"] = tx.kind == TxKind::Message ? (tx.container || targets_[*tx.target].requires_commit(tx.payload)
                                                  ? "reveal"
                                                  : "direct")
                                           : to_string(tx.kind);
    e["actor"] = to_hex(tx.sender);
    if (tx.target) e["target"] = to_hex(targets_[*tx.target].address);
    if (tx.kind != TxKind::Message) e["digest"] = to_hex(tx.digest);
    if (tx.kind == TxKind::Message) e["payload"] = tx.payload;
    e["fee"] = tx.fee;
    e["fast"] = tx.fast();
    e["status"] = to_string(rec.status);
    if (rec.check) e["check"] = to_string(*rec.check);
    log_.push_back(e.dump());
  }

  ChainConfig config_;
  Rng rng_;
  BlockNumber current_ = 0;
  std::vector<Address> addresses_;
  std::vector<TargetContract> targets_;
  std::vector<ContainerContract> containers_;
  std::vector<Transaction> txs_;
  std::vector<TxRecord> records_;
  std::vector<TxId> mempool_;
  std::vector<Block> blocks_;
  std::vector<std::string> log_;
};

}  // namespace frontguard
