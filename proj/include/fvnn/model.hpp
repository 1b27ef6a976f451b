#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fvnn/spectral.hpp"
#include "fvnn/types.hpp"

namespace fvnn {

enum class Activation { relu, tanh, identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct LayerShape {
    Index in_features = 1;
    Index out_features = 1;
    int order = 2;  // K

    bool operator==(const LayerShape&) const = default;
};

struct Architecture {
    std::vector<LayerShape> layers;
    Activation activation = Activation::relu;
    /// Apply the nonlinearity after the last filter bank as well.
    bool activate_last = true;
    Task task = Task::regression;
    Index out_dim = 1;

    void validate() const;
    bool operator==(const Architecture&) const = default;
};

/// One layer's F_out x F_in parallel filters of order K. Taps are stored as an
/// (F_in (K+1)) x F_out matrix whose row j (K+1) + k, column f holds h_k of the
/// filter mapping input feature j to output feature f.
struct FilterBank {
    Index out_features = 0;
    Index in_features = 0;
    int order = 0;
    Matrix taps;

    FilterBank() = default;
    FilterBank(Index out, Index in, int K);

    double& at(Index f, Index j, int k) { return taps(j * (order + 1) + k, f); }
    double at(Index f, Index j, int k) const { return taps(j * (order + 1) + k, f); }
    FilterCoefficients filter(Index f, Index j) const;
};

/// Every trainable quantity of a VNN; also the shape of its gradient.
struct Parameters {
    std::vector<FilterBank> banks;
    Matrix readout_weights;  // F_last x out_dim
    Vector readout_bias;     // out_dim

    Index size() const;
    Vector flatten() const;
    void assign(const Vector& flat);
    Parameters zeros_like() const;
    bool all_finite() const;
};

struct VnnModel {
    Architecture arch;
    Parameters params;
};

/// Taps ~ U[-a, a] with a = 1/sqrt(F_in (K+1)); readout ~ U[-b, b] with
/// b = 1/sqrt(F_last).
VnnModel init_model(const Architecture& arch, std::uint64_t seed);

/// Intermediate signals kept by a training-mode forward pass. Feature maps of
/// a batch of B samples are stored as (N B) x F matrices, sample-major.
struct ForwardCache {
    struct Layer {
        Matrix krylov;  // (N B) x (F_in (K+1)), column j (K+1) + k is C^k x_j
        Matrix pre;     // (N B) x F_out, before the nonlinearity
        bool activated = true;
    };
    Matrix C;
    Index batch = 0;
    std::vector<Layer> layers;
    Matrix pooled;  // B x F_last
};

struct ForwardResult {
    Matrix outputs;  // B x out_dim
    std::optional<ForwardCache> cache;
};

/// X holds one sample per row (B x N).
ForwardResult forward(const VnnModel& model, const Matrix& C, const Matrix& X, bool training = false);

/// Gradient of sum(output_grad .* outputs) with respect to every parameter.
Parameters backward(const VnnModel& model, const std::optional<ForwardCache>& cache, const Matrix& output_grad);

/// Regression: raw outputs. Classification: argmax class index, lowest index
/// on ties.
Vector predict(const VnnModel& model, const Matrix& C, const Matrix& X);

/// Text container with hex-float payload; loading restores identical bits.
std::string serialize_model(const VnnModel& model);
VnnModel deserialize_model(const std::string& text);
void save_model(const std::filesystem::path& path, const VnnModel& model);
VnnModel load_model(const std::filesystem::path& path);

}  // namespace fvnn
