#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gf2lab {

/// Dense bit vector over F2. Bit i lives in word i/64 at position i%64;
/// pad bits past size() are always zero.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t len) : len_(len), words_((len + 63) / 64, 0) {}

    static BitVec from_u64(std::uint64_t value, std::size_t len) {
        if (len > 64) throw std::invalid_argument("BitVec::from_u64: len > 64");
        BitVec v(len);
        if (len > 0) v.words_[0] = value & mask_low(len);
        return v;
    }

    /// Bits listed as 0/1 in index order, e.g. {1,0,1,0} is x0=1, x2=1.
    static BitVec from_bits(std::initializer_list<int> bits) {
        BitVec v(bits.size());
        std::size_t i = 0;
        for (int b : bits) v.set(i++, b != 0);
        return v;
    }

    /// Parses a string of '0'/'1' characters in index order.
    static BitVec from_string(std::string_view s) {
        BitVec v(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1') v.set(i, true);
            else if (s[i] != '0') throw std::invalid_argument("BitVec::from_string: bad character");
        }
        return v;
    }

    std::size_t size() const noexcept { return len_; }
    bool empty() const noexcept { return len_ == 0; }

    bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
    bool operator[](std::size_t i) const noexcept { return get(i); }

    void set(std::size_t i, bool value) noexcept {
        const std::uint64_t bit = std::uint64_t{1} << (i & 63);
        if (value) words_[i >> 6] |= bit;
        else words_[i >> 6] &= ~bit;
    }
    void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    std::span<const std::uint64_t> words() const noexcept { return words_; }
    std::span<std::uint64_t> mutable_words() noexcept { return words_; }

    /// Restores the zero-pad invariant after raw word writes.
    void trim() noexcept {
        if (len_ % 64 != 0 && !words_.empty()) words_.back() &= mask_low(len_ % 64);
    }

    std::uint64_t to_u64() const {
        if (len_ > 64) throw std::length_error("BitVec::to_u64: more than 64 bits");
        return words_.empty() ? 0 : words_[0];
    }

    BitVec& operator^=(const BitVec& o) {
        require_same(o, "xor");
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= o.words_[w];
        return *this;
    }
    BitVec& operator&=(const BitVec& o) {
        require_same(o, "and");
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= o.words_[w];
        return *this;
    }
    BitVec& operator|=(const BitVec& o) {
        require_same(o, "or");
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
        return *this;
    }
    friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
    friend BitVec operator&(BitVec a, const BitVec& b) { return a &= b; }
    friend BitVec operator|(BitVec a, const BitVec& b) { return a |= b; }

    /// F2 inner product.
    bool dot(const BitVec& o) const {
        require_same(o, "dot");
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < words_.size(); ++w) acc ^= words_[w] & o.words_[w];
        return std::popcount(acc) & 1;
    }

    std::size_t popcount() const noexcept {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    bool none() const noexcept {
        return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
    }
    bool any() const noexcept { return !none(); }

    /// Index of the lowest set bit, or size() if none.
    std::size_t lowest_set() const noexcept {
        for (std::size_t w = 0; w < words_.size(); ++w)
            if (words_[w]) return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
        return len_;
    }

    BitVec slice(std::size_t begin, std::size_t len) const {
        if (begin + len > len_) throw std::out_of_range("BitVec::slice out of range");
        BitVec out(len);
        if (begin % 64 == 0) {
            const std::size_t w0 = begin / 64;
            for (std::size_t w = 0; w < out.words_.size(); ++w) out.words_[w] = words_[w0 + w];
            out.trim();
            return out;
        }
        for (std::size_t i = 0; i < len; ++i)
            if (get(begin + i)) out.set(i, true);
        return out;
    }

    /// The first `len` bits.
    BitVec prefix(std::size_t len) const { return slice(0, len); }

    BitVec concat(const BitVec& tail) const {
        BitVec out(len_ + tail.len_);
        std::copy(words_.begin(), words_.end(), out.words_.begin());
        if (len_ % 64 == 0) {
            std::copy(tail.words_.begin(), tail.words_.end(), out.words_.begin() + static_cast<std::ptrdiff_t>(len_ / 64));
        } else {
            for (std::size_t i = 0; i < tail.len_; ++i)
                if (tail.get(i)) out.set(len_ + i, true);
        }
        return out;
    }

    static BitVec concat_all(std::span<const BitVec> parts) {
        std::size_t total = 0;
        for (const auto& p : parts) total += p.size();
        BitVec out(total);
        std::size_t at = 0;
        for (const auto& p : parts) {
            for (std::size_t i = 0; i < p.size(); ++i)
                if (p.get(i)) out.set(at + i, true);
            at += p.size();
        }
        return out;
    }

    /// Splits into equal consecutive blocks.
    std::vector<BitVec> split(std::size_t blocks) const {
        if (blocks == 0 || len_ % blocks != 0) throw std::invalid_argument("BitVec::split: indivisible length");
        std::vector<BitVec> out;
        const std::size_t w = len_ / blocks;
        out.reserve(blocks);
        for (std::size_t b = 0; b < blocks; ++b) out.push_back(slice(b * w, w));
        return out;
    }

    bool operator==(const BitVec& o) const noexcept { return len_ == o.len_ && words_ == o.words_; }

    /// Orders by length, then by the value of the vector read as an integer
    /// with bit i weighted 2^i.
    std::strong_ordering operator<=>(const BitVec& o) const noexcept {
        if (auto c = len_ <=> o.len_; c != 0) return c;
        for (std::size_t w = words_.size(); w-- > 0;)
            if (auto c = words_[w] <=> o.words_[w]; c != 0) return c;
        return std::strong_ordering::equal;
    }

    /// "len:hex" with the most significant nibble first.
    std::string to_text() const { return std::to_string(len_) + ":" + to_hex(); }

    std::string to_hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        const std::size_t nibbles = std::max<std::size_t>(1, (len_ + 3) / 4);
        std::string s(nibbles, '0');
        for (std::size_t k = 0; k < nibbles; ++k) {
            unsigned v = 0;
            for (std::size_t b = 0; b < 4; ++b) {
                const std::size_t i = 4 * k + b;
                if (i < len_ && get(i)) v |= 1u << b;
            }
            s[nibbles - 1 - k] = digits[v];
        }
        return s;
    }

    static BitVec from_hex(std::string_view hex, std::size_t len) {
        BitVec v(len);
        const std::size_t nibbles = hex.size();
        for (std::size_t k = 0; k < nibbles; ++k) {
            const char c = hex[nibbles - 1 - k];
            unsigned val;
            if (c >= '0' && c <= '9') val = static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f') val = static_cast<unsigned>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') val = static_cast<unsigned>(c - 'A' + 10);
            else throw std::invalid_argument("BitVec::from_hex: bad digit");
            for (std::size_t b = 0; b < 4; ++b) {
                if (!((val >> b) & 1u)) continue;
                const std::size_t i = 4 * k + b;
                if (i >= len) throw std::invalid_argument("BitVec::from_hex: value exceeds declared length");
                v.set(i, true);
            }
        }
        return v;
    }

    static BitVec from_text(std::string_view text) {
        const auto colon = text.find(':');
        if (colon == std::string_view::npos) throw std::invalid_argument("BitVec::from_text: expected len:hex");
        const std::size_t len = std::stoul(std::string(text.substr(0, colon)));
        return from_hex(text.substr(colon + 1), len);
    }

    /// Index-order 0/1 string.
    std::string to_bitstring() const {
        std::string s(len_, '0');
        for (std::size_t i = 0; i < len_; ++i)
            if (get(i)) s[i] = '1';
        return s;
    }

    std::size_t hash() const noexcept {
        std::size_t h = std::hash<std::size_t>{}(len_);
        for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }

    static constexpr std::uint64_t mask_low(std::size_t bits) noexcept {
        return bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
    }

private:
    void require_same(const BitVec& o, const char* op) const {
        if (len_ != o.len_) throw std::invalid_argument(std::string("BitVec::") + op + ": length mismatch");
    }

    std::size_t len_ = 0;
    std::vector<std::uint64_t> words_;
};

struct BitVecHash {
    std::size_t operator()(const BitVec& v) const noexcept { return v.hash(); }
};

inline bool parity64(std::uint64_t w) noexcept { return std::popcount(w) & 1; }

}  // namespace gf2lab
