// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#include "teemaf/cas.hpp"

#include <json.hpp>

#include "teemaf/keccak.hpp"

namespace teemaf::cas {

Result<void> Policy::validate() const {
  if (sid.empty()) return Result<void>::failure("invalid-policy", "empty sid");
  if (secrets.empty())
    return Result<void>::failure("invalid-policy", "no secrets");
  const auto sk = secrets.find(kSecretSk);
  if (sk == secrets.end() || sk->second.size() != 32)
    return Result<void>::failure("invalid-policy", "missing 32-byte sk_offcf");
  const auto sca = secrets.find(kSecretSca);
  if (sca == secrets.end() || sca->second.size() != 20)
    return Result<void>::failure("invalid-policy", "missing 20-byte sca_dapp");
  return {};
}

std::string Policy::to_json() const {
  nlohmann::json secrets_json = nlohmann::json::object();
  for (const auto& [name, value] : secrets) secrets_json[name] = to_hex(value);
  const nlohmann::json j{{"sid", sid},
                         {"mre", to_hex(mre)},
                         {"secrets", secrets_json},
                         {"owner", owner.hex()}};
  return j.dump(2);
}

Result<Policy> Policy::from_json(const std::string& text) {
  const auto fail = [](std::string detail) {
    return Result<Policy>::failure("invalid-policy", std::move(detail));
  };
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return fail("malformed json");
  if (!j.contains("sid") || !j["sid"].is_string()) return fail("missing sid");
  if (!j.contains("mre") || !j["mre"].is_string()) return fail("missing mre");
  if (!j.contains("owner") || !j["owner"].is_string()) return fail("missing owner");
  if (!j.contains("secrets") || !j["secrets"].is_object())
    return fail("missing secrets");

  Policy p;
  p.sid = j["sid"].get<std::string>();
  const auto mre = from_hex_fixed<32>(j["mre"].get<std::string>());
  if (!mre) return fail("mre must be 32 hex bytes");
  p.mre = *mre;
  const auto owner = from_hex_fixed<20>(j["owner"].get<std::string>());
  if (!owner) return fail("owner must be 20 hex bytes");
  p.owner.bytes = *owner;
  for (const auto& [name, value] : j["secrets"].items()) {
    if (!value.is_string()) return fail("secret values must be hex strings");
    const auto bytes = from_hex(value.get<std::string>());
    if (!bytes) return fail("bad hex in secret " + name);
    p.secrets[name] = *bytes;
  }
  if (auto v = p.validate(); !v.ok())
    return Result<Policy>::failure(v.error().code, v.error().detail);
  return p;
}

Hash32 endpoint_binding(std::string_view sid, std::uint64_t enclave_handle_id) {
  Bytes material;
  append(material, std::string_view("teemaf.endpoint"));
  append(material, sid);
  append_u64be(material, enclave_handle_id);
  return crypto::keccak256(material);
}

ByteArray<64> make_report_data(const Hash32& nonce, const Hash32& binding) {
  ByteArray<64> out{};
  std::copy(nonce.begin(), nonce.end(), out.begin());
  std::copy(binding.begin(), binding.end(), out.begin() + 32);
  return out;
}

Result<SecretBundle> deliver(const InjectionGrant& grant,
                             const Hash32& receiver_endpoint) {
  if (receiver_endpoint != grant.authorized_endpoint)
    return Result<SecretBundle>::failure(
        "unauthorized-endpoint", "channel bound to the attested container");
  return grant.bundle;
}

Result<void> CasService::register_policy(Policy policy) {
  if (auto v = policy.validate(); !v.ok()) return v;
  if (policies_.contains(policy.sid))
    return Result<void>::failure("duplicate-sid", policy.sid);
  policies_.emplace(policy.sid, std::move(policy));
  return {};
}

Result<SessionStart> CasService::begin_session(std::string_view sid,
                                               std::int64_t now_ms) {
  if (!policies_.contains(sid))
    return Result<SessionStart>::failure("unknown-sid", std::string(sid));
  const std::uint64_t id = next_session_++;
  Session s;
  s.sid = std::string(sid);
  s.nonce = rng_.fixed<32>();
  s.expires_ms = now_ms + kSessionTtlMs;
  s.open = true;
  sessions_[id] = s;
  return SessionStart{id, s.nonce};
}

Result<InjectOutcome> CasService::verify_and_inject(std::uint64_t session_id,
                                                    const enclave::Quote& quote,
                                                    std::int64_t now_ms) {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end() || !it->second.open || now_ms > it->second.expires_ms)
    return Result<InjectOutcome>::failure("unknown-session",
                                          "no open session with that id");
  Session session = it->second;
  it->second.open = false;  // single-use, closes on any outcome

  const auto refuse = [&](std::string code, std::string detail) {
    return Result<InjectOutcome>(InjectOutcome(
        Refusal{std::move(code), std::move(detail)}));
  };

  const Hash32 quoted_nonce = slice<32>(quote.report.report_data, 0);
  if (quoted_nonce != session.nonce)
    return refuse("nonce-mismatch", "freshness nonce does not match session");

  const Policy& policy = policies_.at(session.sid);
  if (quote.report.mre != policy.mre)
    return refuse("mre-mismatch", "quoted measurement differs from policy");

  const enclave::Avr avr = verifier_.verify(quote);
  if (!avr.positive)
    return refuse("attestation-failed", std::string(to_string(avr.reason)));

  InjectionGrant grant;
  std::copy_n(policy.secrets.at(std::string(kSecretSk)).begin(), 32,
              grant.bundle.sk_offcf.begin());
  std::copy_n(policy.secrets.at(std::string(kSecretSca)).begin(), 20,
              grant.bundle.sca_dapp.bytes.begin());
  grant.bundle.session_id = session_id;
  grant.authorized_endpoint = slice<32>(quote.report.report_data, 32);
  return Result<InjectOutcome>(InjectOutcome(std::move(grant)));
}

const Policy* CasService::find_policy(std::string_view sid) const {
  const auto it = policies_.find(sid);
  return it == policies_.end() ? nullptr : &it->second;
}

std::vector<GateRow> exhaustive_gate_truth_table() {
  std::vector<GateRow> rows;
  for (int mask = 0; mask < 8; ++mask) {
    const bool nonce_ok = mask & 4;
    const bool mre_ok = mask & 2;
    const bool avr_ok = mask & 1;

    // Fresh fixture per row so the dimensions stay independent.
    Rng rng(0x9000 + mask);
    auto honest = enclave::PlatformIdentity::provision(1, rng, 3);
    auto rogue = enclave::PlatformIdentity::provision(2, rng, 3);
    enclave::PlatformRegistry registry;
    registry.enroll(honest, 3);  // the rogue platform stays unregistered
    const enclave::SimulatedAttestationService service(std::move(registry));

    const auto image = enclave::EnclaveImage::from_code(rng.bytes(96));
    CasService cas(service, rng.fork("cas"));

    Policy policy;
    policy.sid = "fixture";
    policy.mre = image.mre;
    if (!mre_ok) policy.mre[0] ^= 0x01;  // policy expects a different build
    policy.secrets[std::string(kSecretSk)] = Bytes(32, 0x11);
    policy.secrets[std::string(kSecretSca)] = Bytes(20, 0x22);
    if (!cas.register_policy(policy).ok()) continue;

    enclave::EnclaveHost host;
    const auto& platform = avr_ok ? honest : rogue;
    const auto handle = host.launch(image, platform);
    const auto session = cas.begin_session("fixture", 0).value();

    Hash32 nonce = session.nonce;
    if (!nonce_ok) nonce[0] ^= 0x01;  // container echoes a wrong nonce
    const auto report_data =
        make_report_data(nonce, endpoint_binding("fixture", handle.id));
    const auto report = host.ereport(handle, report_data).value();
    const auto quote = las_quote(report, platform).value();

    GateRow row;
    row.nonce_ok = nonce_ok;
    row.mre_ok = mre_ok;
    row.avr_ok = avr_ok;
    const auto outcome = cas.verify_and_inject(session.session_id, quote, 1);
    if (outcome.ok()) {
      if (std::holds_alternative<InjectionGrant>(outcome.value())) {
        row.released = true;
      } else {
        row.refusal = std::get<Refusal>(outcome.value()).code;
      }
    } else {
      row.refusal = outcome.error().code;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace teemaf::cas
