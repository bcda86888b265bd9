#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "lcq/rng.hpp"

namespace lcq {

struct Transition {
    std::vector<double> x;
    std::vector<double> a;
    double r = 0.0;
    std::vector<double> x_next;
};

/// Fixed-capacity ring of transitions; oldest entries are evicted first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
        ring_.reserve(capacity);
    }

    void push(Transition t) {
        if (ring_.size() < capacity_) {
            ring_.push_back(std::move(t));
        } else {
            ring_[head_] = std::move(t);
            head_ = (head_ + 1) % capacity_;
        }
        ++inserted_;
    }

    std::size_t size() const { return ring_.size(); }
    std::size_t inserted() const { return inserted_; }
    const Transition& operator[](std::size_t i) const { return ring_[i]; }

    /// k draws, uniform with replacement; deterministic given the rng state.
    std::vector<const Transition*> sample(std::size_t k, Rng& rng) const {
        if (ring_.empty()) throw std::invalid_argument("ReplayBuffer: sampling empty buffer");
        std::vector<const Transition*> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i)
            out.push_back(&ring_[static_cast<std::size_t>(rng.below(ring_.size()))]);
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // next eviction slot once full
    std::size_t inserted_ = 0;
    std::vector<Transition> ring_;
};

}  // namespace lcq
