#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace f2s {

// An element of F2^n. Bits are packed LSB-first into 64-bit words; a single
// inline word serves n <= 64, larger n spills into a heap extension.
// Coordinate i (1-based, as in e_i) lives at bit position n - i, so the hex
// form "n:..." reads coordinate 1 as the most significant bit.
class Point {
  public:
    Point() = default;

    explicit Point(uint32_t n) : n_(n), w0_(0) {
        if (n == 0) throw std::invalid_argument("Point: dimension must be positive");
        if (n > 64) ext_.assign(word_count() - 1, 0);
    }

    static Point zero(uint32_t n) { return Point(n); }

    static Point ones(uint32_t n) {
        Point p(n);
        for (size_t i = 0; i < p.word_count(); ++i) p.set_word(i, ~0ull);
        p.trim();
        return p;
    }

    // e_i: coordinate i set (1-based).
    static Point unit(uint32_t n, uint32_t i) {
        if (i < 1 || i > n) throw std::invalid_argument("Point::unit: coordinate out of range");
        Point p(n);
        p.set_bit(n - i, 1);
        return p;
    }

    // Low-index construction: bit j (LSB order) of idx becomes bit j of the point.
    static Point from_index(uint32_t n, uint64_t idx) {
        if (n > 64) throw std::invalid_argument("Point::from_index: n > 64");
        Point p(n);
        p.w0_ = idx & mask_top(n);
        if (n < 64 && idx >= (1ull << n)) throw std::invalid_argument("Point::from_index: index out of range");
        return p;
    }

    uint32_t dim() const { return n_; }
    size_t word_count() const { return (static_cast<size_t>(n_) + 63) / 64; }

    uint64_t word(size_t i) const { return i == 0 ? w0_ : ext_[i - 1]; }
    void set_word(size_t i, uint64_t w) {
        if (i == 0) w0_ = w; else ext_[i - 1] = w;
    }

    // Bit in LSB order (0 <= j < n).
    int bit(uint32_t j) const { return static_cast<int>((word(j >> 6) >> (j & 63)) & 1); }
    void set_bit(uint32_t j, int v) {
        uint64_t w = word(j >> 6);
        w = (w & ~(1ull << (j & 63))) | (static_cast<uint64_t>(v & 1) << (j & 63));
        set_word(j >> 6, w);
    }

    // Coordinate access in the 1-based e_i convention.
    int coord(uint32_t i) const { return bit(n_ - i); }

    uint64_t index() const {
        if (n_ > 64) throw std::logic_error("Point::index: n > 64");
        return w0_;
    }

    bool is_zero() const {
        if (w0_ != 0) return false;
        for (uint64_t w : ext_) if (w != 0) return false;
        return true;
    }

    uint32_t popcount() const {
        uint32_t c = std::popcount(w0_);
        for (uint64_t w : ext_) c += std::popcount(w);
        return c;
    }

    Point operator^(const Point& o) const {
        check_dim(o);
        Point r(*this);
        r.w0_ ^= o.w0_;
        for (size_t i = 0; i < r.ext_.size(); ++i) r.ext_[i] ^= o.ext_[i];
        return r;
    }
    Point& operator^=(const Point& o) {
        check_dim(o);
        w0_ ^= o.w0_;
        for (size_t i = 0; i < ext_.size(); ++i) ext_[i] ^= o.ext_[i];
        return *this;
    }

    // <x,y> = sum x_i y_i mod 2.
    int dot(const Point& o) const {
        check_dim(o);
        uint64_t acc = w0_ & o.w0_;
        int par = std::popcount(acc) & 1;
        for (size_t i = 0; i < ext_.size(); ++i) par ^= std::popcount(ext_[i] & o.ext_[i]) & 1;
        return par;
    }

    bool operator==(const Point& o) const {
        return n_ == o.n_ && w0_ == o.w0_ && ext_ == o.ext_;
    }
    bool operator!=(const Point& o) const { return !(*this == o); }
    bool operator<(const Point& o) const {
        if (n_ != o.n_) return n_ < o.n_;
        for (size_t i = word_count(); i-- > 0;)
            if (word(i) != o.word(i)) return word(i) < o.word(i);
        return false;
    }

    // "n:hex" with ceil(n/4) lowercase digits, MSB = coordinate 1.
    std::string to_hex() const {
        static const char* digits = "0123456789abcdef";
        uint32_t nd = (n_ + 3) / 4;
        std::string s = std::to_string(n_) + ":";
        for (uint32_t d = nd; d-- > 0;) {
            uint32_t lo = 4 * d;
            int v = 0;
            for (uint32_t b = 0; b < 4 && lo + b < n_; ++b) v |= bit(lo + b) << b;
            s.push_back(digits[v]);
        }
        return s;
    }

    static Point from_hex(const std::string& s) {
        auto colon = s.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("Point::from_hex: missing 'n:' prefix");
        uint32_t n = static_cast<uint32_t>(std::stoul(s.substr(0, colon)));
        std::string hex = s.substr(colon + 1);
        uint32_t nd = (n + 3) / 4;
        if (hex.size() != nd) throw std::invalid_argument("Point::from_hex: digit count mismatch");
        Point p(n);
        for (uint32_t d = 0; d < nd; ++d) {
            char c = hex[nd - 1 - d];
            int v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
            else throw std::invalid_argument("Point::from_hex: bad digit");
            for (uint32_t b = 0; b < 4; ++b) {
                uint32_t j = 4 * d + b;
                if (j < n) p.set_bit(j, (v >> b) & 1);
                else if ((v >> b) & 1) throw std::invalid_argument("Point::from_hex: bits beyond dimension");
            }
        }
        return p;
    }

    size_t hash() const {
        uint64_t h = 0x9e3779b97f4a7c15ull ^ n_;
        auto mix = [&](uint64_t w) {
            h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        };
        mix(w0_);
        for (uint64_t w : ext_) mix(w);
        return static_cast<size_t>(h);
    }

    void check_dim(const Point& o) const {
        if (n_ != o.n_) throw std::invalid_argument("Point: dimension mismatch");
    }

  private:
    static uint64_t mask_top(uint32_t n) { return n >= 64 ? ~0ull : (1ull << n) - 1; }

    void trim() {
        uint32_t rem = n_ & 63;
        if (rem == 0) return;
        size_t last = word_count() - 1;
        set_word(last, word(last) & ((1ull << rem) - 1));
    }

    uint32_t n_ = 0;
    uint64_t w0_ = 0;
    std::vector<uint64_t> ext_;
};

inline Point xor_points(const Point& a, const Point& b) { return a ^ b; }

struct PointHash {
    size_t operator()(const Point& p) const { return p.hash(); }
};

}  // namespace f2s
