// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#include "teemaf/enclave.hpp"

#include <sstream>

#include "teemaf/keccak.hpp"

namespace teemaf::enclave {

Measurement measure(ByteSpan code) { return crypto::keccak256(code); }

PlatformIdentity::PlatformIdentity(std::uint64_t platform_id,
                                   const ByteArray<32>& rpk,
                                   std::uint32_t firmware_version)
    : platform_id_(platform_id), firmware_version_(firmware_version), rpk_(rpk) {
  derive_attestation_key();
}

PlatformIdentity PlatformIdentity::provision(std::uint64_t platform_id, Rng& rng,
                                             std::uint32_t firmware_version) {
  return PlatformIdentity(platform_id, rng.fixed<32>(), firmware_version);
}

void PlatformIdentity::set_firmware_version(std::uint32_t version) {
  firmware_version_ = version;
  derive_attestation_key();
}

void PlatformIdentity::derive_attestation_key() {
  // ak = KDF(rpk, firmware_version), rejection-sampled into scalar range.
  for (std::uint8_t counter = 0;; ++counter) {
    Bytes material;
    append(material, std::string_view("teemaf.ak.v1"));
    append(material, rpk_);
    append_u32be(material, firmware_version_);
    material.push_back(counter);
    const Hash32 candidate = crypto::keccak256(material);
    auto kp = crypto::keypair_from_sk(candidate);
    if (kp.ok()) {
      ak_ = std::move(kp).value();
      return;
    }
  }
}

EnclaveImage EnclaveImage::from_code(Bytes code) {
  EnclaveImage img;
  img.mre = measure(code);
  img.code = std::move(code);
  return img;
}

Bytes Report::serialize() const {
  Bytes out;
  out.reserve(32 + 64 + 12);
  append(out, mre);
  append(out, report_data);
  append_u64be(out, platform_id);
  append_u32be(out, firmware_version);
  return out;
}

EnclaveHandle EnclaveHost::launch(const EnclaveImage& image,
                                  const PlatformIdentity& platform) {
  const std::uint64_t id = next_id_++;
  const Measurement mre = measure(image.code);
  enclaves_[id] = LiveEnclave{&platform, mre, true};
  return EnclaveHandle{id, platform.platform_id(), mre};
}

Result<Report> EnclaveHost::ereport(const EnclaveHandle& handle,
                                    const ByteArray<64>& report_data) const {
  const auto it = enclaves_.find(handle.id);
  if (it == enclaves_.end() || !it->second.live)
    return Result<Report>::failure("stale-handle", "enclave not live");
  Report report;
  report.mre = it->second.mre;
  report.report_data = report_data;
  report.platform_id = it->second.platform->platform_id();
  report.firmware_version = it->second.platform->firmware_version();
  return report;
}

void EnclaveHost::terminate(const EnclaveHandle& handle) {
  const auto it = enclaves_.find(handle.id);
  if (it != enclaves_.end()) it->second.live = false;
}

Result<Quote> las_quote(const Report& report, const PlatformIdentity& platform) {
  if (report.platform_id != platform.platform_id())
    return Result<Quote>::failure("cross-platform-report",
                                  "local attestation requires the same platform");
  auto sig = crypto::sign(report.serialize(), platform.ak_.sk);
  if (!sig.ok()) return Result<Quote>::failure(sig.error().code, sig.error().detail);
  return Quote{report, std::move(sig).value()};
}

void PlatformRegistry::enroll(const PlatformIdentity& platform,
                              std::uint32_t min_firmware) {
  entries[platform.platform_id()] =
      Entry{platform.attestation_public_key(), min_firmware};
}

std::string PlatformRegistry::to_text() const {
  std::ostringstream out;
  out << "# platform_id attestation_pk min_firmware\n";
  for (const auto& [id, entry] : entries) {
    Bytes id_bytes;
    append_u64be(id_bytes, id);
    out << to_hex(id_bytes) << ' ' << to_hex(entry.attestation_pk) << ' '
        << entry.min_firmware << '\n';
  }
  return out.str();
}

Result<PlatformRegistry> PlatformRegistry::from_text(const std::string& text) {
  PlatformRegistry reg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string id_hex, pk_hex;
    std::uint32_t min_fw = 0;
    if (!(fields >> id_hex >> pk_hex >> min_fw))
      return Result<PlatformRegistry>::failure(
          "parse-error", "registry line " + std::to_string(lineno));
    const auto id_bytes = from_hex_fixed<8>(id_hex);
    const auto pk = from_hex_fixed<64>(pk_hex);
    if (!id_bytes || !pk)
      return Result<PlatformRegistry>::failure(
          "parse-error", "bad hex on registry line " + std::to_string(lineno));
    std::uint64_t id = 0;
    for (const auto b : *id_bytes) id = (id << 8) | b;
    reg.entries[id] = Entry{*pk, min_fw};
  }
  return reg;
}

std::string_view to_string(AvrReason reason) {
  switch (reason) {
    case AvrReason::kNone: return "none";
    case AvrReason::kBadSignature: return "bad-signature";
    case AvrReason::kUnknownPlatform: return "unknown-platform";
    case AvrReason::kStaleFirmware: return "stale-firmware";
  }
  return "unknown";
}

Avr verify_quote(const Quote& quote, const PlatformRegistry& registry) {
  Avr avr;
  avr.quoted_mre = quote.report.mre;
  avr.platform_id = quote.report.platform_id;

  const auto it = registry.entries.find(quote.report.platform_id);
  if (it == registry.entries.end()) {
    avr.reason = AvrReason::kUnknownPlatform;
    return avr;
  }
  if (quote.report.firmware_version < it->second.min_firmware) {
    avr.reason = AvrReason::kStaleFirmware;
    return avr;
  }
  const auto expected = crypto::derive_address(it->second.attestation_pk);
  const auto recovered = crypto::recover(
      crypto::eth_signed_message_hash(quote.report.serialize()),
      quote.ak_signature);
  if (!expected.ok() || !recovered.ok() ||
      !(recovered.value() == expected.value())) {
    avr.reason = AvrReason::kBadSignature;
    return avr;
  }
  avr.positive = true;
  return avr;
}

}  // namespace teemaf::enclave
