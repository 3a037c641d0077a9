#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hetnet/error.hpp"
#include "hetnet/sequence.hpp"

namespace hetnet {

struct Equilibrium {
    int id = 0;
    std::vector<double> position;
    std::string name;
};

struct Connection {
    int id = 0;
    int source = 0;
    int target = 0;
    std::vector<double> witness;
};

class HeteroclinicNetwork {
public:
    HeteroclinicNetwork() = default;

    HeteroclinicNetwork(std::size_t dim, std::vector<Equilibrium> equilibria, std::vector<Connection> connections)
        : dim_(dim), equilibria_(std::move(equilibria)), connections_(std::move(connections)) {
        if (dim_ == 0) throw SpecError("network: ambient dimension must be positive");
        if (equilibria_.empty()) throw SpecError("network: no equilibria");
        for (std::size_t i = 0; i < equilibria_.size(); ++i) {
            const auto& e = equilibria_[i];
            if (e.position.size() != dim_)
                throw SpecError("network: equilibrium " + std::to_string(e.id) + " has dimension " +
                                std::to_string(e.position.size()) + ", expected " + std::to_string(dim_));
            if (!eq_index_.emplace(e.id, i).second) throw SpecError("network: duplicate equilibrium id " + std::to_string(e.id));
        }
        for (std::size_t i = 0; i < connections_.size(); ++i) {
            const auto& c = connections_[i];
            if (!conn_index_.emplace(c.id, i).second) throw SpecError("network: duplicate connection id " + std::to_string(c.id));
            if (!eq_index_.count(c.source) || !eq_index_.count(c.target))
                throw SpecError("network: connection " + std::to_string(c.id) + " has dangling endpoint (" +
                                std::to_string(c.source) + " -> " + std::to_string(c.target) + ")");
            if (c.witness.size() != dim_)
                throw SpecError("network: witness of connection " + std::to_string(c.id) + " has dimension " +
                                std::to_string(c.witness.size()) + ", expected " + std::to_string(dim_));
            for (const auto& e : equilibria_) {
                double d2 = 0.0;
                for (std::size_t k = 0; k < dim_; ++k) d2 += (c.witness[k] - e.position[k]) * (c.witness[k] - e.position[k]);
                if (std::sqrt(d2) < 1e-12)
                    throw SpecError("network: witness of connection " + std::to_string(c.id) + " coincides with equilibrium " +
                                    std::to_string(e.id));
            }
        }
        check_connected();
    }

    std::size_t dim() const { return dim_; }
    const std::vector<Equilibrium>& equilibria() const { return equilibria_; }
    const std::vector<Connection>& connections() const { return connections_; }

    bool has_equilibrium(int id) const { return eq_index_.count(id) != 0; }
    bool has_connection(int id) const { return conn_index_.count(id) != 0; }

    const Equilibrium& equilibrium(int id) const {
        auto it = eq_index_.find(id);
        if (it == eq_index_.end()) throw DomainError("unknown equilibrium id " + std::to_string(id));
        return equilibria_[it->second];
    }
    const Connection& connection(int id) const {
        auto it = conn_index_.find(id);
        if (it == conn_index_.end()) throw DomainError("unknown connection symbol " + std::to_string(id));
        return connections_[it->second];
    }

    std::vector<int> out_connections(int eq) const {
        std::vector<int> out;
        for (const auto& c : connections_)
            if (c.source == eq) out.push_back(c.id);
        return out;
    }

private:
    void check_connected() const {
        if (equilibria_.size() < 2) return;
        std::map<int, std::vector<int>> adj;
        for (const auto& c : connections_) {
            adj[c.source].push_back(c.target);
            adj[c.target].push_back(c.source);
        }
        std::set<int> seen{equilibria_.front().id};
        std::vector<int> stack{equilibria_.front().id};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : adj[v])
                if (seen.insert(w).second) stack.push_back(w);
        }
        if (seen.size() != equilibria_.size()) throw SpecError("network: graph is not connected");
    }

    std::size_t dim_ = 0;
    std::vector<Equilibrium> equilibria_;
    std::vector<Connection> connections_;
    std::map<int, std::size_t> eq_index_;
    std::map<int, std::size_t> conn_index_;
};

struct SequenceCheck {
    bool valid = true;
    std::optional<std::size_t> first_violation;
};

inline SequenceCheck validate_sequence(const HeteroclinicNetwork& net, std::span<const Symbol> word) {
    for (Symbol s : word) net.connection(s);
    for (std::size_t k = 1; k < word.size(); ++k) {
        if (net.connection(word[k - 1]).target != net.connection(word[k]).source) return {false, k};
    }
    return {};
}

inline SequenceCheck validate_sequence(const HeteroclinicNetwork& net, const SymbolSequence& s, std::size_t horizon) {
    if (s.kind() == SymbolSequence::Kind::eventually_periodic) {
        // head, one period, and the wrap-around of the tail decide validity exactly.
        std::size_t n = s.head().size() + 2 * s.tail().size();
        return validate_sequence(net, s.prefix(n));
    }
    return validate_sequence(net, s.prefix(horizon));
}

struct InvariantSet {
    std::set<int> equilibria;
    std::set<int> connections;
    bool operator==(const InvariantSet&) const = default;
};

// Gamma(q): the connections visited infinitely often and their endpoints.
// Finite sequences contribute every symbol; generated ones are judged on the
// last half of the inspected prefix.
inline InvariantSet invariant_set(const HeteroclinicNetwork& net, const SymbolSequence& s, std::size_t horizon = 1000) {
    Word recurrent;
    if (s.kind() == SymbolSequence::Kind::eventually_periodic) {
        recurrent = s.tail();
    } else if (s.kind() == SymbolSequence::Kind::finite) {
        recurrent = s.head();
    } else {
        Word w = s.prefix(horizon);
        recurrent.assign(w.begin() + static_cast<std::ptrdiff_t>(w.size() / 2), w.end());
    }
    InvariantSet out;
    for (Symbol q : recurrent) {
        const auto& c = net.connection(q);
        out.connections.insert(q);
        out.equilibria.insert(c.source);
        out.equilibria.insert(c.target);
    }
    return out;
}

inline std::vector<int> distribution_nodes(const HeteroclinicNetwork& net) {
    std::vector<int> out;
    for (const auto& e : net.equilibria())
        if (net.out_connections(e.id).size() >= 2) out.push_back(e.id);
    return out;
}

// Block code for itineraries, e.g. A = (1,2,3), B = (1,4,5) anchored at 1.
// With an anchor every block starts with it; without one the blocks only
// need to be prefix-free.
class CycleCoding {
public:
    CycleCoding() = default;
    CycleCoding(std::optional<Symbol> anchor, std::map<std::string, Word> symbols) : anchor_(anchor), symbols_(std::move(symbols)) {
        if (symbols_.empty()) throw SpecError("coding: no symbols");
        for (const auto& [label, block] : symbols_) {
            if (label.empty()) throw SpecError("coding: empty label");
            if (block.empty()) throw SpecError("coding: block for '" + label + "' is empty");
            if (anchor_ && block.front() != *anchor_)
                throw SpecError("coding: block for '" + label + "' does not start at the anchor " + std::to_string(*anchor_));
        }
        for (const auto& [l1, b1] : symbols_)
            for (const auto& [l2, b2] : symbols_)
                if (l1 != l2 && b1.size() <= b2.size() && std::equal(b1.begin(), b1.end(), b2.begin()))
                    throw SpecError("coding: block '" + l1 + "' is a prefix of '" + l2 + "'");
    }

    void check_against(const HeteroclinicNetwork& net) const {
        for (const auto& [label, block] : symbols_) {
            auto chk = validate_sequence(net, block);
            if (!chk.valid) throw SpecError("coding: block '" + label + "' is not a path in the network");
            // blocks must chain with each other: last target must be the first source of every block
            Symbol last = block.back();
            for (const auto& [l2, b2] : symbols_)
                if (net.connection(last).target != net.connection(b2.front()).source)
                    throw SpecError("coding: block '" + label + "' cannot be followed by '" + l2 + "'");
        }
    }

    const std::optional<Symbol>& anchor() const { return anchor_; }
    const std::map<std::string, Word>& symbols() const { return symbols_; }

private:
    std::optional<Symbol> anchor_;
    std::map<std::string, Word> symbols_;
};

struct Recoded {
    std::vector<std::string> symbols;
    // Unmatched trailing symbols, a proper prefix of some block.
    Word remainder;

    std::string joined() const {
        std::string out;
        for (const auto& s : symbols) out += s;
        return out;
    }
};

inline Recoded recode(const CycleCoding& coding, std::span<const Symbol> word, bool allow_partial_tail = false) {
    Recoded out;
    if (word.empty()) return out;
    if (coding.anchor() && word.front() != *coding.anchor())
        throw DomainError("not codable: word does not start at anchor " + std::to_string(*coding.anchor()));
    std::size_t i = 0;
    while (i < word.size()) {
        bool matched = false;
        bool partial = false;
        for (const auto& [label, block] : coding.symbols()) {
            std::size_t n = std::min(block.size(), word.size() - i);
            if (!std::equal(block.begin(), block.begin() + static_cast<std::ptrdiff_t>(n), word.begin() + static_cast<std::ptrdiff_t>(i)))
                continue;
            if (n == block.size()) {
                out.symbols.push_back(label);
                i += n;
                matched = true;
                break;
            }
            partial = true;
        }
        if (matched) continue;
        if (partial && allow_partial_tail) {
            out.remainder.assign(word.begin() + static_cast<std::ptrdiff_t>(i), word.end());
            return out;
        }
        throw DomainError("not codable: no block matches at position " + std::to_string(i));
    }
    return out;
}

inline Word decode(const CycleCoding& coding, std::span<const std::string> coded) {
    Word out;
    for (const auto& label : coded) {
        auto it = coding.symbols().find(label);
        if (it == coding.symbols().end()) throw DomainError("decode: unknown code symbol '" + label + "'");
        out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
}

// Splits "AB" style strings when every label is one character.
inline std::vector<std::string> split_code(const CycleCoding& coding, const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        bool found = false;
        for (const auto& [label, block] : coding.symbols()) {
            if (text.compare(i, label.size(), label) == 0) {
                out.push_back(label);
                i += label.size();
                found = true;
                break;
            }
        }
        if (!found) throw DomainError("decode: cannot parse code string '" + text + "'");
    }
    return out;
}

// Recodes a periodic tail after rotating it to start at the anchor.
inline std::optional<Recoded> recode_periodic_tail(const CycleCoding& coding, std::span<const Symbol> tail) {
    for (std::size_t start = 0; start < tail.size(); ++start) {
        if (coding.anchor() && tail[start] != *coding.anchor()) continue;
        try {
            return recode(coding, detail::rotate_left(tail, start));
        } catch (const DomainError&) {
        }
    }
    return std::nullopt;
}

}  // namespace hetnet
