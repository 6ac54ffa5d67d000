// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#include "teemaf/crypto.hpp"

#include <cstring>
#include <string>

#include "teemaf/keccak.hpp"
#include "teemaf/sha256.hpp"

namespace teemaf::crypto {
namespace {

// ---------------------------------------------------------------------
// 256-bit arithmetic. Little-endian 64-bit limbs; not constant-time (this
// backs a protocol simulator, not a hostile-input signer).

struct U256 {
  std::uint64_t w[4] = {0, 0, 0, 0};

  bool operator==(const U256&) const = default;
};

constexpr U256 kZero{};

// p = 2^256 - 2^32 - 977
constexpr U256 kFieldP{0xfffffffefffffc2fULL, 0xffffffffffffffffULL,
                       0xffffffffffffffffULL, 0xffffffffffffffffULL};
// n: secp256k1 group order
constexpr U256 kOrderN{0xbfd25e8cd0364141ULL, 0xbaaedce6af48a03bULL,
                       0xfffffffffffffffeULL, 0xffffffffffffffffULL};
// 2^256 - p
constexpr U256 kFieldD{0x00000001000003d1ULL, 0, 0, 0};
// 2^256 - n
constexpr U256 kOrderD{0x402da1732fc9bebfULL, 0x4551231950b75fc4ULL, 1, 0};
// (n - 1) / 2, the low-s threshold
constexpr U256 kHalfN{0xdfe92f46681b20a0ULL, 0x5d576e7357a4501dULL,
                      0xffffffffffffffffULL, 0x7fffffffffffffffULL};

U256 from_be(const std::uint8_t* p) {
  U256 out;
  for (int limb = 0; limb < 4; ++limb) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[(3 - limb) * 8 + i];
    out.w[limb] = v;
  }
  return out;
}

void to_be(const U256& a, std::uint8_t* out) {
  for (int limb = 0; limb < 4; ++limb)
    for (int i = 0; i < 8; ++i)
      out[(3 - limb) * 8 + i] =
          static_cast<std::uint8_t>(a.w[limb] >> (56 - 8 * i));
}

int cmp(const U256& a, const U256& b) {
  for (int i = 3; i >= 0; --i) {
    if (a.w[i] < b.w[i]) return -1;
    if (a.w[i] > b.w[i]) return 1;
  }
  return 0;
}

bool is_zero(const U256& a) { return a == kZero; }

// out = a + b, returns carry
std::uint64_t add(const U256& a, const U256& b, U256& out) {
  unsigned __int128 acc = 0;
  for (int i = 0; i < 4; ++i) {
    acc += a.w[i];
    acc += b.w[i];
    out.w[i] = static_cast<std::uint64_t>(acc);
    acc >>= 64;
  }
  return static_cast<std::uint64_t>(acc);
}

// out = a - b, returns borrow
std::uint64_t sub(const U256& a, const U256& b, U256& out) {
  unsigned __int128 borrow = 0;
  for (int i = 0; i < 4; ++i) {
    unsigned __int128 d = static_cast<unsigned __int128>(a.w[i]) - b.w[i] - borrow;
    out.w[i] = static_cast<std::uint64_t>(d);
    borrow = (d >> 64) & 1;
  }
  return static_cast<std::uint64_t>(borrow);
}

struct U512 {
  std::uint64_t w[8] = {};
};

U512 mul_wide(const U256& a, const U256& b) {
  U512 out;
  for (int i = 0; i < 4; ++i) {
    std::uint64_t carry = 0;
    for (int j = 0; j < 4; ++j) {
      unsigned __int128 acc = static_cast<unsigned __int128>(a.w[i]) * b.w[j];
      acc += out.w[i + j];
      acc += carry;
      out.w[i + j] = static_cast<std::uint64_t>(acc);
      carry = static_cast<std::uint64_t>(acc >> 64);
    }
    out.w[i + 4] = carry;
  }
  return out;
}

// Reduces a 512-bit value mod m, where m = 2^256 - d. Folds the high part
// via hi*2^256 ≡ hi*d until it vanishes, then subtracts m as needed.
U256 reduce_wide(U512 x, const U256& d, const U256& m) {
  for (;;) {
    U256 lo{{x.w[0], x.w[1], x.w[2], x.w[3]}};
    U256 hi{{x.w[4], x.w[5], x.w[6], x.w[7]}};
    if (is_zero(hi)) {
      U256 r = lo;
      while (cmp(r, m) >= 0) {
        U256 t;
        sub(r, m, t);
        r = t;
      }
      return r;
    }
    U512 folded = mul_wide(hi, d);
    unsigned __int128 acc = 0;
    for (int i = 0; i < 4; ++i) {
      acc += folded.w[i];
      acc += lo.w[i];
      folded.w[i] = static_cast<std::uint64_t>(acc);
      acc >>= 64;
    }
    for (int i = 4; i < 8; ++i) {
      acc += folded.w[i];
      folded.w[i] = static_cast<std::uint64_t>(acc);
      acc >>= 64;
    }
    x = folded;
  }
}

U256 mod_add(const U256& a, const U256& b, const U256& m) {
  U256 r;
  const std::uint64_t carry = add(a, b, r);
  if (carry || cmp(r, m) >= 0) {
    U256 t;
    sub(r, m, t);
    return t;
  }
  return r;
}

U256 mod_sub(const U256& a, const U256& b, const U256& m) {
  U256 r;
  if (sub(a, b, r)) {
    U256 t;
    add(r, m, t);
    return t;
  }
  return r;
}

U256 mod_mul(const U256& a, const U256& b, const U256& d, const U256& m) {
  return reduce_wide(mul_wide(a, b), d, m);
}

U256 mod_pow(const U256& base, const U256& exp, const U256& d, const U256& m) {
  U256 result{{1, 0, 0, 0}};
  U256 acc = base;
  for (int limb = 0; limb < 4; ++limb) {
    std::uint64_t e = exp.w[limb];
    for (int bit = 0; bit < 64; ++bit) {
      if (e & 1) result = mod_mul(result, acc, d, m);
      acc = mod_mul(acc, acc, d, m);
      e >>= 1;
    }
  }
  return result;
}

// Field helpers (mod p)
U256 fmul(const U256& a, const U256& b) { return mod_mul(a, b, kFieldD, kFieldP); }
U256 fsqr(const U256& a) { return fmul(a, a); }
U256 fadd(const U256& a, const U256& b) { return mod_add(a, b, kFieldP); }
U256 fsub(const U256& a, const U256& b) { return mod_sub(a, b, kFieldP); }

U256 finv(const U256& a) {
  U256 e;
  sub(kFieldP, U256{{2, 0, 0, 0}}, e);
  return mod_pow(a, e, kFieldD, kFieldP);
}

// Scalar helpers (mod n)
U256 smul(const U256& a, const U256& b) { return mod_mul(a, b, kOrderD, kOrderN); }
U256 sinv(const U256& a) {
  U256 e;
  sub(kOrderN, U256{{2, 0, 0, 0}}, e);
  return mod_pow(a, e, kOrderD, kOrderN);
}

U256 reduce_mod_n(const U256& a) {
  U512 wide;
  for (int i = 0; i < 4; ++i) wide.w[i] = a.w[i];
  return reduce_wide(wide, kOrderD, kOrderN);
}

// ---------------------------------------------------------------------
// Curve group, Jacobian coordinates. y^2 = x^3 + 7.

constexpr U256 kGenX{0x59f2815b16f81798ULL, 0x029bfcdb2dce28d9ULL,
                     0x55a06295ce870b07ULL, 0x79be667ef9dcbbacULL};
constexpr U256 kGenY{0x9c47d08ffb10d4b8ULL, 0xfd17b448a6855419ULL,
                     0x5da4fbfc0e1108a8ULL, 0x483ada7726a3c465ULL};
constexpr U256 kCurveB{{7, 0, 0, 0}};

struct Point {
  U256 x, y, z;  // z == 0 encodes infinity
  bool infinity() const { return is_zero(z); }
};

const Point kInfinity{kZero, kZero, kZero};

Point to_jacobian(const U256& x, const U256& y) {
  return Point{x, y, U256{{1, 0, 0, 0}}};
}

Point pt_double(const Point& p) {
  if (p.infinity() || is_zero(p.y)) return kInfinity;
  const U256 a = fsqr(p.x);
  const U256 b = fsqr(p.y);
  const U256 c = fsqr(b);
  U256 d = fsub(fsqr(fadd(p.x, b)), fadd(a, c));
  d = fadd(d, d);
  const U256 e = fadd(fadd(a, a), a);
  const U256 f = fsqr(e);
  const U256 x3 = fsub(f, fadd(d, d));
  U256 c8 = fadd(c, c);
  c8 = fadd(c8, c8);
  c8 = fadd(c8, c8);
  const U256 y3 = fsub(fmul(e, fsub(d, x3)), c8);
  const U256 yz = fmul(p.y, p.z);
  return Point{x3, y3, fadd(yz, yz)};
}

Point pt_add(const Point& p, const Point& q) {
  if (p.infinity()) return q;
  if (q.infinity()) return p;
  const U256 z1z1 = fsqr(p.z);
  const U256 z2z2 = fsqr(q.z);
  const U256 u1 = fmul(p.x, z2z2);
  const U256 u2 = fmul(q.x, z1z1);
  const U256 s1 = fmul(p.y, fmul(q.z, z2z2));
  const U256 s2 = fmul(q.y, fmul(p.z, z1z1));
  const U256 h = fsub(u2, u1);
  const U256 r = fsub(s2, s1);
  if (is_zero(h)) {
    if (is_zero(r)) return pt_double(p);
    return kInfinity;
  }
  const U256 hh = fsqr(h);
  const U256 hhh = fmul(h, hh);
  const U256 v = fmul(u1, hh);
  U256 x3 = fsub(fsqr(r), hhh);
  x3 = fsub(x3, fadd(v, v));
  const U256 y3 = fsub(fmul(r, fsub(v, x3)), fmul(s1, hhh));
  const U256 z3 = fmul(fmul(p.z, q.z), h);
  return Point{x3, y3, z3};
}

int nibble(const U256& k, int index) {  // index 0 = most significant nibble
  const int bit = 252 - 4 * index;
  return static_cast<int>((k.w[bit / 64] >> (bit % 64)) & 0xf);
}

// Fixed-window multiplication of the generator; table built once.
Point mul_generator(const U256& k) {
  static const auto table = [] {
    std::array<Point, 16> t{};
    t[0] = kInfinity;
    t[1] = to_jacobian(kGenX, kGenY);
    for (int i = 2; i < 16; ++i) t[i] = pt_add(t[i - 1], t[1]);
    return t;
  }();
  Point acc = kInfinity;
  for (int i = 0; i < 64; ++i) {
    for (int d = 0; d < 4; ++d) acc = pt_double(acc);
    const int w = nibble(k, i);
    if (w) acc = pt_add(acc, table[w]);
  }
  return acc;
}

// a*G + b*Q in one pass (Strauss-Shamir); the recovery hot path.
Point mul_shamir(const U256& a, const U256& b, const Point& q) {
  const Point g = to_jacobian(kGenX, kGenY);
  const Point gq = pt_add(g, q);
  Point acc = kInfinity;
  for (int bit = 255; bit >= 0; --bit) {
    acc = pt_double(acc);
    const bool ba = (a.w[bit / 64] >> (bit % 64)) & 1;
    const bool bb = (b.w[bit / 64] >> (bit % 64)) & 1;
    if (ba && bb)
      acc = pt_add(acc, gq);
    else if (ba)
      acc = pt_add(acc, g);
    else if (bb)
      acc = pt_add(acc, q);
  }
  return acc;
}

struct Affine {
  U256 x, y;
};

bool to_affine(const Point& p, Affine& out) {
  if (p.infinity()) return false;
  const U256 zi = finv(p.z);
  const U256 zi2 = fsqr(zi);
  out.x = fmul(p.x, zi2);
  out.y = fmul(p.y, fmul(zi2, zi));
  return true;
}

bool on_curve(const U256& x, const U256& y) {
  const U256 lhs = fsqr(y);
  const U256 rhs = fadd(fmul(fsqr(x), x), kCurveB);
  return lhs == rhs;
}

// y from x with requested parity; p ≡ 3 (mod 4) so sqrt = pow((p+1)/4).
bool lift_x(const U256& x, bool odd_y, Affine& out) {
  if (cmp(x, kFieldP) >= 0) return false;
  const U256 rhs = fadd(fmul(fsqr(x), x), kCurveB);
  U256 e;
  add(kFieldP, U256{{1, 0, 0, 0}}, e);  // p + 1 fits: p < 2^256 - 1
  for (int s = 0; s < 2; ++s) {
    for (int i = 0; i < 4; ++i) {
      e.w[i] >>= 1;
      if (i < 3) e.w[i] |= e.w[i + 1] << 63;
    }
  }
  U256 y = mod_pow(rhs, e, kFieldD, kFieldP);
  if (fsqr(y) != rhs) return false;  // x^3 + 7 is a non-residue
  const bool is_odd = (y.w[0] & 1) != 0;
  if (is_odd != odd_y) y = fsub(kZero, y);
  out.x = x;
  out.y = y;
  return true;
}

// ---------------------------------------------------------------------
// RFC 6979 nonce stream (HMAC-SHA256, qlen = hlen = 256).

class NonceStream {
 public:
  NonceStream(const ByteArray<32>& sk, const Hash32& digest) {
    const U256 h_mod = reduce_mod_n(from_be(digest.data()));
    ByteArray<32> h_oct{};
    to_be(h_mod, h_oct.data());

    v_.fill(0x01);
    k_.fill(0x00);
    step(0x00, sk, h_oct);
    step(0x01, sk, h_oct);
  }

  U256 next() {
    for (;;) {
      v_ = hmac_sha256(k_, v_);
      const U256 cand = from_be(v_.data());
      const bool valid = !is_zero(cand) && cmp(cand, kOrderN) < 0;
      if (valid) return cand;
      retry();
    }
  }

  void retry() {
    Bytes msg(v_.begin(), v_.end());
    msg.push_back(0x00);
    k_ = hmac_sha256(k_, msg);
    v_ = hmac_sha256(k_, v_);
  }

 private:
  void step(std::uint8_t tag, const ByteArray<32>& sk, const ByteArray<32>& h) {
    Bytes msg(v_.begin(), v_.end());
    msg.push_back(tag);
    append(msg, sk);
    append(msg, h);
    k_ = hmac_sha256(k_, msg);
    v_ = hmac_sha256(k_, v_);
  }

  Hash32 v_{};
  Hash32 k_{};
};

bool valid_scalar(const U256& s) { return !is_zero(s) && cmp(s, kOrderN) < 0; }

}  // namespace

KeyPair keygen(Rng& rng) {
  for (;;) {
    const ByteArray<32> sk = rng.fixed<32>();
    auto kp = keypair_from_sk(sk);
    if (kp.ok()) return kp.value();
  }
}

KeyPair keygen(std::uint64_t seed) {
  Rng rng(seed);
  return keygen(rng);
}

Result<KeyPair> keypair_from_sk(const ByteArray<32>& sk) {
  const U256 scalar = from_be(sk.data());
  if (!valid_scalar(scalar))
    return Result<KeyPair>::failure("invalid-key", "scalar outside [1, n-1]");
  Affine pub;
  to_affine(mul_generator(scalar), pub);
  KeyPair kp;
  kp.sk = sk;
  to_be(pub.x, kp.pk.data());
  to_be(pub.y, kp.pk.data() + 32);
  return kp;
}

Result<EthAddress> derive_address(const ByteArray<64>& pk) {
  const U256 x = from_be(pk.data());
  const U256 y = from_be(pk.data() + 32);
  if (cmp(x, kFieldP) >= 0 || cmp(y, kFieldP) >= 0 || !on_curve(x, y))
    return Result<EthAddress>::failure("invalid-point", "pk not on secp256k1");
  const Hash32 h = keccak256(pk);
  EthAddress out;
  std::memcpy(out.bytes.data(), h.data() + 12, 20);
  return out;
}

MessageDigest eth_signed_message_hash(ByteSpan msg) {
  Bytes prefixed;
  prefixed.reserve(msg.size() + 32);
  append(prefixed, std::string_view("\x19""Ethereum Signed Message:\n"));
  append(prefixed, std::to_string(msg.size()));
  append(prefixed, msg);
  return MessageDigest{keccak256(prefixed)};
}

Result<Signature> sign(ByteSpan msg, const ByteArray<32>& sk) {
  const U256 sk_scalar = from_be(sk.data());
  if (!valid_scalar(sk_scalar))
    return Result<Signature>::failure("invalid-key", "scalar outside [1, n-1]");

  const MessageDigest digest = eth_signed_message_hash(msg);
  const U256 z = reduce_mod_n(from_be(digest.bytes.data()));

  NonceStream nonces(sk, digest.bytes);
  for (;;) {
    const U256 k = nonces.next();
    Affine r_pt;
    to_affine(mul_generator(k), r_pt);
    // r must equal the x coordinate itself so v stays in {27, 28}
    if (cmp(r_pt.x, kOrderN) >= 0 || is_zero(r_pt.x)) {
      nonces.retry();
      continue;
    }
    const U256 r = r_pt.x;
    U256 s = smul(sinv(k), mod_add(z, smul(r, sk_scalar), kOrderN));
    if (is_zero(s)) {
      nonces.retry();
      continue;
    }
    int recid = static_cast<int>(r_pt.y.w[0] & 1);
    if (cmp(s, kHalfN) > 0) {
      s = mod_sub(kZero, s, kOrderN);
      recid ^= 1;
    }
    Signature sig;
    to_be(r, sig.r.data());
    to_be(s, sig.s.data());
    sig.v = static_cast<std::uint8_t>(27 + recid);
    return sig;
  }
}

Result<EthAddress> recover(const MessageDigest& digest, const Signature& sig) {
  const auto fail = [](const char* why) {
    return Result<EthAddress>::failure("unrecoverable", why);
  };
  if (sig.v != 27 && sig.v != 28) return fail("recovery id outside {27, 28}");
  const U256 r = from_be(sig.r.data());
  const U256 s = from_be(sig.s.data());
  if (!valid_scalar(r) || !valid_scalar(s)) return fail("r or s outside [1, n-1]");

  Affine r_pt;
  if (!lift_x(r, sig.v == 28, r_pt)) return fail("r is not a curve x-coordinate");

  const U256 z = reduce_mod_n(from_be(digest.bytes.data()));
  const U256 r_inv = sinv(r);
  const U256 u1 = smul(mod_sub(kZero, z, kOrderN), r_inv);
  const U256 u2 = smul(s, r_inv);

  Affine q;
  if (!to_affine(mul_shamir(u1, u2, to_jacobian(r_pt.x, r_pt.y)), q))
    return fail("recovered point at infinity");

  ByteArray<64> pk{};
  to_be(q.x, pk.data());
  to_be(q.y, pk.data() + 32);
  const Hash32 h = keccak256(pk);
  EthAddress out;
  std::memcpy(out.bytes.data(), h.data() + 12, 20);
  return out;
}

}  // namespace teemaf::crypto
