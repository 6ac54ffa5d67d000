// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "teemaf/bytes.hpp"

namespace teemaf::crypto {

Hash32 sha256(ByteSpan data);

// HMAC-SHA256; used by the RFC 6979 nonce derivation.
Hash32 hmac_sha256(ByteSpan key, ByteSpan data);

}  // namespace teemaf::crypto
