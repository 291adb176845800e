#pragma once

#include <deque>
#include <memory>
#include <random>
#include <string>

#include "scol/correlated.hpp"
#include "scol/ring.hpp"

namespace scol {

// Trusted cryptography service provider. Generates all correlated randomness
// from its own seed; its output is a function of (seed, requested shapes)
// only and never of any party's data.
class Dealer {
  public:
    Dealer(int parties, FixedPointCodec codec, u64 seed)
        : parties_(parties), codec_(codec), rng_(seed) {}

    BeaverTriple gen_beaver(std::size_t n);
    BeaverTriple gen_matmul(std::uint32_t m, std::uint32_t k, std::uint32_t n);
    TruncationPair gen_trunc_pair(std::size_t n);
    ComparisonTuple gen_cmp_tuple(std::size_t n);

    int parties() const { return parties_; }
    const FixedPointCodec& codec() const { return codec_; }

  private:
    SharedTensor share_raw(const std::vector<RingElement>& values,
                           std::vector<std::uint32_t> shape);
    std::vector<BeaverTriple> gen_aux(std::size_t n, std::size_t count);

    int parties_;
    FixedPointCodec codec_;
    std::mt19937_64 rng_;
};

// Generates lazily from the dealer, enforcing a planned budget (consuming
// more than planned raises ProtocolError). Pass enforce=false for tests that
// want an unmetered stream.
class OnDemandPool : public RandomnessPool {
  public:
    OnDemandPool(Dealer& dealer, RandomnessBudget budget, bool enforce = true)
        : dealer_(dealer), budget_(std::move(budget)), enforce_(enforce) {}

    BeaverTriple take_beaver(std::size_t n) override;
    BeaverTriple take_matmul(std::uint32_t m, std::uint32_t k, std::uint32_t n) override;
    TruncationPair take_trunc(std::size_t n) override;
    ComparisonTuple take_cmp(std::size_t n) override;

  private:
    void charge(const RandKey& key);
    Dealer& dealer_;
    RandomnessBudget budget_;
    bool enforce_;
};

// All randomness materialized ahead of the online phase.
class OfflinePool : public RandomnessPool {
  public:
    // Generates the full budget up front (the offline phase).
    OfflinePool(Dealer& dealer, const RandomnessBudget& budget);

    BeaverTriple take_beaver(std::size_t n) override;
    BeaverTriple take_matmul(std::uint32_t m, std::uint32_t k, std::uint32_t n) override;
    TruncationPair take_trunc(std::size_t n) override;
    ComparisonTuple take_cmp(std::size_t n) override;

  private:
    std::map<RandKey, std::deque<BeaverTriple>> beaver_;
    std::map<RandKey, std::deque<TruncationPair>> trunc_;
    std::map<RandKey, std::deque<ComparisonTuple>> cmp_;
};

// Triple-file format: kind(1), count(4 LE), shape block (rank(1), dims 4 LE),
// then per item the owning party's share blocks of each constituent tensor.
// One file per party per kind.
void write_beaver_file(const std::string& path, const std::vector<BeaverTriple>& items, int party);
std::vector<BeaverTriple> read_beaver_file(const std::string& path, int party, int parties);
void write_trunc_file(const std::string& path, const std::vector<TruncationPair>& items, int party);
std::vector<TruncationPair> read_trunc_file(const std::string& path, int party, int parties);
void write_cmp_file(const std::string& path, const std::vector<ComparisonTuple>& items, int party);
std::vector<ComparisonTuple> read_cmp_file(const std::string& path, int party, int parties);

}  // namespace scol
