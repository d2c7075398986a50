#pragma once

#include "lobflow/flows.hpp"
#include "lobflow/message.hpp"

#include <cstdint>
#include <vector>

namespace lobflow {

enum class SynthMode { message_level, bucket_level };

// Every random draw comes from a per-component stream seeded with
// (seed, component): arrivals, event choice, sizes, prices, signs, noise.
struct SynthConfig {
    std::uint64_t seed = 1;
    SynthMode mode = SynthMode::message_level;

    // message level
    Timestamp session_start = 10 * 3600 * kNanosPerSecond;
    Ticks start_bid = 2629;
    std::size_t levels_per_side = 10;
    std::vector<Shares> depth_profile{800, 1000, 1200, 1400, 1600, 1600, 1600, 1600, 1600, 1600};
    Shares lot = 100;
    std::size_t orders_per_level = 3;
    std::size_t target_buckets = 50;
    Shares bucket_volume = 5000;

    double market_rate = 1.0;       // market orders per second
    double mean_trade_lots = 3.0;
    double buy_fraction = 0.5;
    double sign_persistence = 0.3;  // P(repeat the previous sign) before a fresh draw
    double touch_add_rate = 3.0;    // per side, per second
    double touch_cancel_rate = 2.0; // per side, per second when the touch holds depth_profile[0]
    double deep_add_rate = 1.0;
    double deep_cancel_rate = 0.5;  // per second when the deeper book holds its seeded volume
    double improve_prob = 0.6;      // touch add inside a wide spread
    double modify_fraction = 0.1;   // share of cancel events sent as MODIFY
    double hidden_fraction = 0.0;   // extra hidden executions per market order
    bool split_executions = true;   // one EXECUTE per consumed level

    // Cancel intensities scale with resting volume relative to the seeded
    // ladder so queue sizes stay stationary.
    //
    // Hockey-stick modulation by the running trade imbalance: the active
    // side's touch cancels scale by 1 + gain * max(0, |TI| - kink) and its
    // touch adds by max(0, 1 - add_drop * max(0, |TI| - kink)).
    double hockey_kink = 0.3;
    double hockey_gain = 0.0;
    double hockey_add_drop = 0.0;

    // bucket level
    std::size_t n_buckets = 10000;
    double alpha0 = 0.0;
    double alpha1 = 1.0;
    double alpha2 = 0.6;
    double sigma = 0.1;
    double vl_mean = 1.0;  // VL^j / V ~ Normal(vl_mean, vl_sd)
    double vl_sd = 0.5;
    Shares linear_volume = 1'000'000;

    void validate() const;  // throws InvalidConfig
};

// Replayable, time-sorted stream; seeding ADDs are stamped one second
// before session_start. Executed visible volume reaches at least
// target_buckets * bucket_volume.
std::vector<Message> generate_session(const SynthConfig& cfg);

// Bucket records drawn from the linear price-formation model
// delta_p = a0 + a1 TI + a2 (VL_bid - VL_ask)/V + N(0, sigma^2).
FlowSeries sample_linear_buckets(const SynthConfig& cfg);

}  // namespace lobflow
