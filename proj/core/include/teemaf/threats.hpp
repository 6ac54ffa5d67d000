// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// Executable adversary scenarios, one per threat-model class: each script
// attacks a fresh simulation and records which defense fired. A defense
// that does not fire is a failed scenario, not an error.

#pragma once

#include <string>
#include <vector>

#include "teemaf/result.hpp"

namespace teemaf::threats {

enum class AdversaryKind {
  kTamperImage,         // flip image bytes (system-software adversary)
  kReplayQuote,         // replay a captured quote in a new CAS session
  kReplaySignature,     // resubmit a captured (msg, sig) on-chain
  kRollbackState,       // roll a container file block counter backwards
  kFirmwareRollback,    // downgrade platform firmware below the minimum
  kUnauthorizedChannel, // deliver injected secrets to the wrong endpoint
  kMalformedMessage,    // garbage against CAS/LAS/registry endpoints
};

std::string_view to_string(AdversaryKind kind);
Result<AdversaryKind> kind_from_string(std::string_view name);

struct AdversaryScript {
  AdversaryKind kind = AdversaryKind::kTamperImage;
  std::uint64_t seed = 1;
  std::size_t byte_offset = 0;      // tamper-image
  std::uint64_t counter_delta = 1;  // rollback-state / firmware-rollback

  std::string to_json() const;
};

struct ScenarioOutcome {
  AdversaryKind kind = AdversaryKind::kTamperImage;
  bool defense_fired = false;
  std::string defense;      // the check that stopped the attack
  std::string detail;
  std::string final_state;  // on-chain deployment state when applicable

  std::string to_json() const;
};

ScenarioOutcome apply(const AdversaryScript& script);

// Replay of a captured on-chain signature, run in both modes. With the
// guard the resubmission verifies false; in faithful mode it verifies
// true, which documents the unguarded scheme's gap.
struct ReplayComparison {
  bool guarded_accepted_replay = false;
  bool faithful_accepted_replay = false;
};
ReplayComparison replay_signature_comparison(std::uint64_t seed);

// Scenario files: a JSON array of scripts.
Result<std::vector<AdversaryScript>> load_scenarios(const std::string& text);
std::vector<AdversaryScript> default_scenario_pack();

// One JSON object per line.
std::string outcomes_to_jsonl(const std::vector<ScenarioOutcome>& outcomes);

}  // namespace teemaf::threats
