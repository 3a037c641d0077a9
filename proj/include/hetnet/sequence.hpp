#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetnet/error.hpp"

namespace hetnet {

// Connection ids are the symbols of itineraries.
using Symbol = int;
using Word = std::vector<Symbol>;

// a b^{j_1} a b^{j_2} ... with j_k = first_exponent + (k-1) * step.
struct StaircaseRule {
    Word a;
    Word b;
    std::size_t first_exponent = 1;
    std::size_t step = 1;
};

namespace detail {

// Smallest p dividing |w| with w = u^{|w|/p}.
inline std::size_t primitive_period(std::span<const Symbol> w) {
    const std::size_t n = w.size();
    for (std::size_t p = 1; p < n; ++p) {
        if (n % p != 0) continue;
        bool ok = true;
        for (std::size_t i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
        if (ok) return p;
    }
    return n;
}

inline Word rotate_left(std::span<const Symbol> w, std::size_t r) {
    Word out(w.begin(), w.end());
    if (!out.empty()) std::rotate(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(r % out.size()), out.end());
    return out;
}

}  // namespace detail

// Lexicographically least rotation.
inline Word min_rotation(std::span<const Symbol> w) {
    Word best(w.begin(), w.end());
    for (std::size_t r = 1; r < w.size(); ++r) {
        Word cand = detail::rotate_left(w, r);
        if (cand < best) best = std::move(cand);
    }
    return best;
}

class SymbolSequence {
public:
    enum class Kind { finite, eventually_periodic, generated };

    SymbolSequence() = default;

    static SymbolSequence finite(Word w) {
        SymbolSequence s;
        s.kind_ = Kind::finite;
        s.head_ = std::move(w);
        return s;
    }

    // Normalised on construction: the tail is reduced to its primitive root
    // and the head is shortened while its last symbol equals the tail's last.
    static SymbolSequence eventually_periodic(Word head, Word tail) {
        if (tail.empty()) throw DomainError("eventually periodic sequence needs a nonempty tail");
        tail.resize(detail::primitive_period(tail));
        while (!head.empty() && head.back() == tail.back()) {
            head.pop_back();
            std::rotate(tail.rbegin(), tail.rbegin() + 1, tail.rend());
        }
        SymbolSequence s;
        s.kind_ = Kind::eventually_periodic;
        s.head_ = std::move(head);
        s.tail_ = std::move(tail);
        return s;
    }

    static SymbolSequence periodic(Word tail) { return eventually_periodic({}, std::move(tail)); }

    static SymbolSequence generated(StaircaseRule rule, std::size_t offset = 0) {
        if (rule.a.empty() || rule.b.empty()) throw DomainError("staircase blocks must be nonempty");
        SymbolSequence s;
        s.kind_ = Kind::generated;
        s.rule_ = std::move(rule);
        s.offset_ = offset;
        return s;
    }

    Kind kind() const { return kind_; }
    bool is_infinite() const { return kind_ != Kind::finite; }
    std::optional<std::size_t> length() const {
        if (kind_ == Kind::finite) return head_.size();
        return std::nullopt;
    }
    const Word& head() const { return head_; }
    const Word& tail() const { return tail_; }
    const StaircaseRule& rule() const { return rule_; }
    std::size_t offset() const { return offset_; }

    Symbol at(std::size_t i) const {
        switch (kind_) {
        case Kind::finite:
            if (i >= head_.size()) throw DomainError("index past end of finite sequence");
            return head_[i];
        case Kind::eventually_periodic:
            if (i < head_.size()) return head_[i];
            return tail_[(i - head_.size()) % tail_.size()];
        case Kind::generated:
            return prefix(i + 1).back();
        }
        return 0;
    }

    // First n symbols (all of them for a shorter finite sequence).
    Word prefix(std::size_t n) const {
        Word out;
        switch (kind_) {
        case Kind::finite:
            out.assign(head_.begin(), head_.begin() + static_cast<std::ptrdiff_t>(std::min(n, head_.size())));
            break;
        case Kind::eventually_periodic:
            out.reserve(n);
            for (std::size_t i = 0; i < n; ++i) out.push_back(at(i));
            break;
        case Kind::generated: {
            out.reserve(n);
            std::size_t skipped = 0;
            std::size_t exponent = rule_.first_exponent;
            auto emit = [&](const Word& block) {
                for (Symbol s : block) {
                    if (out.size() == n) return;
                    if (skipped < offset_) {
                        ++skipped;
                        continue;
                    }
                    out.push_back(s);
                }
            };
            while (out.size() < n) {
                emit(rule_.a);
                for (std::size_t j = 0; j < exponent && out.size() < n; ++j) emit(rule_.b);
                exponent += rule_.step;
            }
            break;
        }
        }
        return out;
    }

    bool operator==(const SymbolSequence& o) const {
        if (kind_ != o.kind_) return false;
        if (kind_ == Kind::generated) {
            return rule_.a == o.rule_.a && rule_.b == o.rule_.b && rule_.first_exponent == o.rule_.first_exponent &&
                   rule_.step == o.rule_.step && offset_ == o.offset_;
        }
        return head_ == o.head_ && tail_ == o.tail_;
    }

private:
    Kind kind_ = Kind::finite;
    Word head_;
    Word tail_;
    StaircaseRule rule_;
    std::size_t offset_ = 0;
};

inline SymbolSequence shift(const SymbolSequence& s, std::size_t k) {
    switch (s.kind()) {
    case SymbolSequence::Kind::finite: {
        const Word& w = s.head();
        if (k > w.size()) throw DomainError("shift by " + std::to_string(k) + " exceeds finite length " + std::to_string(w.size()));
        return SymbolSequence::finite(Word(w.begin() + static_cast<std::ptrdiff_t>(k), w.end()));
    }
    case SymbolSequence::Kind::eventually_periodic: {
        const Word& h = s.head();
        if (k <= h.size()) return SymbolSequence::eventually_periodic(Word(h.begin() + static_cast<std::ptrdiff_t>(k), h.end()), s.tail());
        return SymbolSequence::periodic(detail::rotate_left(s.tail(), (k - h.size()) % s.tail().size()));
    }
    case SymbolSequence::Kind::generated:
        return SymbolSequence::generated(s.rule(), s.offset() + k);
    }
    return s;
}

struct Periodicity {
    enum class Kind { periodic, preperiodic, aperiodic_within_horizon };
    Kind kind = Kind::aperiodic_within_horizon;
    std::size_t period = 0;
    std::size_t preperiod = 0;
};

// Periodic tail detection on a finite word: the smallest period K whose
// repeating tail covers at least `min_periods` periods and at least
// `min_fraction` of the word, with the smallest matching preperiod.
inline std::optional<Periodicity> detect_periodic_tail(std::span<const Symbol> w, std::size_t min_periods = 2,
                                                        double min_fraction = 0.0) {
    const std::size_t n = w.size();
    for (std::size_t K = 1; K * min_periods <= n; ++K) {
        std::size_t start = n - K;  // w[i] == w[i+K] for all i >= start
        while (start > 0 && w[start - 1] == w[start - 1 + K]) --start;
        const std::size_t span_len = n - start;
        if (span_len < K * min_periods) continue;
        if (static_cast<double>(span_len) < min_fraction * static_cast<double>(n)) continue;
        Periodicity p;
        p.period = K;
        p.preperiod = start;
        p.kind = start == 0 ? Periodicity::Kind::periodic : Periodicity::Kind::preperiodic;
        return p;
    }
    return std::nullopt;
}

inline Periodicity classify_periodicity(const SymbolSequence& s, std::size_t horizon) {
    if (horizon < 2) throw DomainError("classify_periodicity: horizon must be at least 2");
    switch (s.kind()) {
    case SymbolSequence::Kind::eventually_periodic: {
        Periodicity p;
        p.period = s.tail().size();
        p.preperiod = s.head().size();
        p.kind = p.preperiod == 0 ? Periodicity::Kind::periodic : Periodicity::Kind::preperiodic;
        return p;
    }
    case SymbolSequence::Kind::finite:
    case SymbolSequence::Kind::generated: {
        Word w = s.prefix(horizon);
        if (auto p = detect_periodic_tail(w, 2, 0.5)) return *p;
        return {};
    }
    }
    return {};
}

// Sequence built from a finite word by repeating its detected periodic tail.
inline std::optional<SymbolSequence> extrapolate(std::span<const Symbol> w, std::size_t min_periods = 2) {
    auto p = detect_periodic_tail(w, min_periods);
    if (!p) return std::nullopt;
    Word head(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(p->preperiod));
    Word tail(w.begin() + static_cast<std::ptrdiff_t>(p->preperiod),
              w.begin() + static_cast<std::ptrdiff_t>(p->preperiod + p->period));
    return SymbolSequence::eventually_periodic(std::move(head), std::move(tail));
}

// Smallest o with shift(a, o) == b, for eventually periodic sequences.
inline std::optional<std::size_t> shift_offset(const SymbolSequence& a, const SymbolSequence& b) {
    if (a.kind() != SymbolSequence::Kind::eventually_periodic || b.kind() != SymbolSequence::Kind::eventually_periodic)
        throw DomainError("shift_offset needs eventually periodic sequences");
    const std::size_t limit = a.head().size() + a.tail().size();
    for (std::size_t o = 0; o < limit; ++o)
        if (shift(a, o) == b) return o;
    return std::nullopt;
}

// True if u occurs as a contiguous block of w.
inline bool is_factor(std::span<const Symbol> u, std::span<const Symbol> w) {
    if (u.empty()) return true;
    return std::search(w.begin(), w.end(), u.begin(), u.end()) != w.end();
}

inline bool is_suffix(std::span<const Symbol> u, std::span<const Symbol> w) {
    return u.size() <= w.size() && std::equal(u.begin(), u.end(), w.end() - static_cast<std::ptrdiff_t>(u.size()));
}

inline std::string to_string(std::span<const Symbol> w) {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(w[i]);
    }
    return out;
}

inline std::string to_string(const SymbolSequence& s) {
    switch (s.kind()) {
    case SymbolSequence::Kind::finite:
        return "(" + to_string(s.head()) + ")";
    case SymbolSequence::Kind::eventually_periodic:
        return "(" + to_string(s.head()) + ")(" + to_string(s.tail()) + ")^inf";
    case SymbolSequence::Kind::generated:
        return "staircase[a=(" + to_string(s.rule().a) + "),b=(" + to_string(s.rule().b) +
               "),j0=" + std::to_string(s.rule().first_exponent) + ",step=" + std::to_string(s.rule().step) +
               ",offset=" + std::to_string(s.offset()) + "]";
    }
    return {};
}

}  // namespace hetnet
