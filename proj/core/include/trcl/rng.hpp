#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "trcl/linalg.hpp"

namespace trcl {

/// Engine whose state is a pure function of the key. Draws for (seed,
/// sample index, ...) never depend on how many other draws happened before,
/// so losses and batches are reproducible regardless of call order.
std::mt19937_64 keyed_engine(std::initializer_list<std::uint64_t> key);

/// n independent standard normal draws from `gen`.
Vector standard_normal(std::mt19937_64& gen, std::size_t n);

/// Distinct stream tags used as the second key component.
enum class Stream : std::uint64_t {
    DiffusionDraw = 0x11,
    DiffusionInit = 0x12,
    DiffusionStep = 0x13,
    Batch = 0x21,
    Replay = 0x22,
    Reservoir = 0x23,
    TaskPick = 0x24,
    Split = 0x25,
    Dataset = 0x31,
    Init = 0x32,
    ModelSample = 0x41,
};

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace trcl
