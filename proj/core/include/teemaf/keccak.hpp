// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "teemaf/bytes.hpp"

namespace teemaf::crypto {

// Keccak-256 (the pre-NIST pad-0x01 variant used by Ethereum).
Hash32 keccak256(ByteSpan data);

}  // namespace teemaf::crypto
