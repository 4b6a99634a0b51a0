#pragma once

#include <filesystem>
#include <string>

#include "gridsync/network.hpp"

namespace testutil {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(GRIDSYNC_DATA_DIR) / name;
}

// slack + pq bus joined by one reactance, no load.
inline gridsync::NetworkCase two_bus(double x = 0.1, double load_p = 0.0, double load_q = 0.0) {
    gridsync::NetworkCase net;
    net.buses = {{1, gridsync::BusKind::Slack, 1.0, 0.0}, {2, gridsync::BusKind::Pq, 1.0, 0.0}};
    net.branches = {{1, 2, {0.0, x}, 0.0}};
    net.generators = {{1, gridsync::GenTech::Sg, 0.03, 0.03, 100.0, load_p, 0.0}};
    if (load_p != 0.0 || load_q != 0.0) net.loads = {{2, load_p, load_q}};
    return net;
}

// Two dynamic generators (slack + pv) with a mid loaded bus; n = 2 boundary.
inline gridsync::NetworkCase two_gen_case() {
    gridsync::NetworkCase net;
    net.buses = {{1, gridsync::BusKind::Slack, 1.0, 0.0},
                 {2, gridsync::BusKind::Pv, 1.0, 0.0},
                 {3, gridsync::BusKind::Pq, 1.0, 0.0}};
    net.branches = {{1, 3, {0.005, 0.08}, 0.02}, {3, 2, {0.004, 0.06}, 0.02}};
    net.generators = {{1, gridsync::GenTech::Sg, 0.03, 0.03, 100.0, 0.4, 0.0},
                      {2, gridsync::GenTech::Sg, 0.02, 0.025, 100.0, 0.4, 0.0}};
    net.loads = {{3, 0.8, 0.2}};
    return net;
}

// Ring of four generator buses with a shared load bus; n = 4 boundary.
inline gridsync::NetworkCase four_gen_case() {
    gridsync::NetworkCase net;
    net.buses = {{1, gridsync::BusKind::Slack, 1.02, 0.0},
                 {2, gridsync::BusKind::Pv, 1.01, 0.0},
                 {3, gridsync::BusKind::Pv, 1.0, 0.0},
                 {4, gridsync::BusKind::Pv, 1.01, 0.0},
                 {5, gridsync::BusKind::Pq, 1.0, 0.0}};
    net.branches = {{1, 2, {0.004, 0.06}, 0.03}, {2, 3, {0.005, 0.07}, 0.03},
                    {3, 4, {0.004, 0.05}, 0.03}, {4, 1, {0.006, 0.08}, 0.03},
                    {1, 5, {0.003, 0.05}, 0.02}, {3, 5, {0.003, 0.05}, 0.02}};
    net.generators = {{1, gridsync::GenTech::Sg, 0.030, 0.035, 120.0, 0.5, 0.0},
                      {2, gridsync::GenTech::Sg, 0.022, 0.020, 100.0, 0.4, 0.0},
                      {3, gridsync::GenTech::Sg, 0.018, 0.015, 90.0, 0.3, 0.0},
                      {4, gridsync::GenTech::Sg, 0.026, 0.030, 110.0, 0.45, 0.0}};
    net.loads = {{5, 1.6, 0.4}};
    return net;
}

}  // namespace testutil
