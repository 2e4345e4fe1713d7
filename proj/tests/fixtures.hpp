#pragma once

#include "epsweep/network_io.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace fixtures {

inline std::filesystem::path example(const std::string& name) {
    return std::filesystem::path(EPSWEEP_DATA_DIR) / "examples" / name;
}

inline epsweep::SpringNetwork five_spring() {
    return epsweep::load_network(example("five_spring_network.json"));
}

/// Five-spring network with unit stiffness and limits, optionally without
/// the offset input.
inline epsweep::SpringNetwork five_spring_unit(bool with_offset = true) {
    auto net = five_spring();
    for (auto& s : net.springs) {
        s.stiffness = 1.0;
        s.c_minus = -1.0;
        s.c_plus = 1.0;
    }
    if (!with_offset) net.offset = {};
    return net;
}

inline Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd b(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) b(i, j) = u(rng);
    return b * b.transpose() + 0.2 * Eigen::MatrixXd::Identity(d, d);
}

inline Eigen::VectorXd random_vector(int d, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = u(rng);
    return v;
}

/// Temporary directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("epsweep_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

}  // namespace fixtures
