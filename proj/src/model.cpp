#include "fvnn/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fvnn/csv.hpp"
#include "fvnn/error.hpp"
#include "fvnn/rng.hpp"

namespace fvnn {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::identity: return "identity";
    }
    return "relu";
}

Activation activation_from_string(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "identity") return Activation::identity;
    fail(ErrorCode::config, "unknown nonlinearity '" + std::string(name) + "'");
}

void Architecture::validate() const {
    require(!layers.empty(), ErrorCode::architecture, "architecture has no layers");
    require(layers.front().in_features == 1, ErrorCode::architecture, "first layer must take one input feature");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& s = layers[l];
        require(s.in_features >= 1 && s.out_features >= 1, ErrorCode::architecture,
                "layer " + std::to_string(l + 1) + " has an empty feature dimension");
        require(s.order >= 0, ErrorCode::architecture, "layer " + std::to_string(l + 1) + " has negative order");
        if (l > 0)
            require(layers[l - 1].out_features == s.in_features, ErrorCode::architecture,
                    "layer " + std::to_string(l + 1) + " input features do not match previous output");
    }
    if (task == Task::regression)
        require(out_dim == 1, ErrorCode::architecture, "regression readout must have out_dim 1");
    else
        require(out_dim >= 2, ErrorCode::architecture, "classification readout needs at least two classes");
}

FilterBank::FilterBank(Index out, Index in, int K)
    : out_features(out), in_features(in), order(K), taps(Matrix::Zero(in * (K + 1), out)) {}

FilterCoefficients FilterBank::filter(Index f, Index j) const {
    Vector h(order + 1);
    for (int k = 0; k <= order; ++k) h[k] = at(f, j, k);
    return FilterCoefficients(std::move(h));
}

Index Parameters::size() const {
    Index n = readout_weights.size() + readout_bias.size();
    for (const auto& b : banks) n += b.taps.size();
    return n;
}

Vector Parameters::flatten() const {
    Vector flat(size());
    Index pos = 0;
    for (const auto& b : banks) {
        flat.segment(pos, b.taps.size()) = b.taps.reshaped();
        pos += b.taps.size();
    }
    flat.segment(pos, readout_weights.size()) = readout_weights.reshaped();
    pos += readout_weights.size();
    flat.segment(pos, readout_bias.size()) = readout_bias;
    return flat;
}

void Parameters::assign(const Vector& flat) {
    require(flat.size() == size(), ErrorCode::shape, "parameter vector has the wrong length");
    Index pos = 0;
    for (auto& b : banks) {
        b.taps.reshaped() = flat.segment(pos, b.taps.size());
        pos += b.taps.size();
    }
    readout_weights.reshaped() = flat.segment(pos, readout_weights.size());
    pos += readout_weights.size();
    readout_bias = flat.segment(pos, readout_bias.size());
}

Parameters Parameters::zeros_like() const {
    Parameters z = *this;
    for (auto& b : z.banks) b.taps.setZero();
    z.readout_weights.setZero();
    z.readout_bias.setZero();
    return z;
}

bool Parameters::all_finite() const {
    for (const auto& b : banks)
        if (!b.taps.allFinite()) return false;
    return readout_weights.allFinite() && readout_bias.allFinite();
}

VnnModel init_model(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    Rng rng(seed);
    VnnModel model;
    model.arch = arch;
    for (const auto& s : arch.layers) {
        FilterBank bank(s.out_features, s.in_features, s.order);
        const double a = 1.0 / std::sqrt(static_cast<double>(s.in_features * (s.order + 1)));
        std::uniform_real_distribution<double> u(-a, a);
        for (Index f = 0; f < s.out_features; ++f)
            for (Index j = 0; j < s.in_features; ++j)
                for (int k = 0; k <= s.order; ++k) bank.at(f, j, k) = u(rng);
        model.params.banks.push_back(std::move(bank));
    }
    const Index last = arch.layers.back().out_features;
    const double b = 1.0 / std::sqrt(static_cast<double>(last));
    std::uniform_real_distribution<double> u(-b, b);
    model.params.readout_weights.resize(last, arch.out_dim);
    for (Index f = 0; f < last; ++f)
        for (Index o = 0; o < arch.out_dim; ++o) model.params.readout_weights(f, o) = u(rng);
    model.params.readout_bias.resize(arch.out_dim);
    for (Index o = 0; o < arch.out_dim; ++o) model.params.readout_bias[o] = u(rng);
    return model;
}

namespace {

Matrix activate(Activation a, const Matrix& pre) {
    switch (a) {
        case Activation::relu: return pre.cwiseMax(0.0);
        case Activation::tanh: return pre.array().tanh().matrix();
        case Activation::identity: return pre;
    }
    return pre;
}

Matrix activation_derivative(Activation a, const Matrix& pre) {
    switch (a) {
        case Activation::relu: return (pre.array() > 0.0).cast<double>().matrix();
        case Activation::tanh: return (1.0 - pre.array().tanh().square()).matrix();
        case Activation::identity: return Matrix::Ones(pre.rows(), pre.cols());
    }
    return Matrix::Ones(pre.rows(), pre.cols());
}

void check_shapes(const VnnModel& model, const Matrix& C, const Matrix& X) {
    require(C.rows() == C.cols(), ErrorCode::shape, "covariance must be square");
    require(X.cols() == C.rows(), ErrorCode::shape,
            "samples have dimension " + std::to_string(X.cols()) + ", covariance is " + std::to_string(C.rows()));
    require(model.params.banks.size() == model.arch.layers.size(), ErrorCode::shape,
            "model parameters do not match its architecture");
}

}  // namespace

ForwardResult forward(const VnnModel& model, const Matrix& C, const Matrix& X, bool training) {
    check_shapes(model, C, X);
    const Index N = C.rows(), B = X.rows();
    const Index NB = N * B;
    const auto& layers = model.arch.layers;

    ForwardResult result;
    ForwardCache cache;
    if (training) {
        cache.C = C;
        cache.batch = B;
    }

    // Column-major N x B, so sample b occupies rows b N .. b N + N - 1.
    Matrix signals = X.transpose().reshaped(NB, 1);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& shape = layers[l];
        const FilterBank& bank = model.params.banks[l];
        const int K1 = shape.order + 1;

        Matrix krylov(NB, shape.in_features * K1);
        for (Index j = 0; j < shape.in_features; ++j) {
            krylov.col(j * K1) = signals.col(j);
            for (int k = 1; k < K1; ++k) {
                Eigen::Map<const Matrix> prev(krylov.col(j * K1 + k - 1).data(), N, B);
                Eigen::Map<Matrix> next(krylov.col(j * K1 + k).data(), N, B);
                next.noalias() = C * prev;
            }
        }
        Matrix pre = krylov * bank.taps;
        const bool activated = l + 1 < layers.size() || model.arch.activate_last;
        signals = activated ? activate(model.arch.activation, pre) : pre;
        if (!signals.allFinite())
            fail(ErrorCode::numeric, "non-finite activation in layer " + std::to_string(l + 1));
        if (training) cache.layers.push_back({std::move(krylov), std::move(pre), activated});
    }

    Matrix pooled(B, signals.cols());
    for (Index f = 0; f < signals.cols(); ++f) {
        Eigen::Map<const Matrix> feature(signals.col(f).data(), N, B);
        pooled.col(f) = feature.colwise().mean().transpose();
    }
    result.outputs = (pooled * model.params.readout_weights).rowwise() + model.params.readout_bias.transpose();
    if (!result.outputs.allFinite()) fail(ErrorCode::numeric, "non-finite readout output");
    if (training) {
        cache.pooled = std::move(pooled);
        result.cache = std::move(cache);
    }
    return result;
}

Parameters backward(const VnnModel& model, const std::optional<ForwardCache>& cache, const Matrix& output_grad) {
    if (!cache) fail(ErrorCode::state, "backward needs the cache of a training-mode forward pass");
    const ForwardCache& fc = *cache;
    require(output_grad.rows() == fc.batch && output_grad.cols() == model.arch.out_dim, ErrorCode::shape,
            "upstream gradient shape does not match the cached batch");
    require(fc.layers.size() == model.arch.layers.size(), ErrorCode::state, "cache does not match the model");

    const Index N = fc.C.rows(), B = fc.batch, NB = N * B;
    Parameters grad = model.params.zeros_like();
    grad.readout_weights.noalias() = fc.pooled.transpose() * output_grad;
    grad.readout_bias = output_grad.colwise().sum().transpose();

    // d loss / d pooled, spread evenly over the N nodes of each sample.
    const Matrix dpooled = output_grad * model.params.readout_weights.transpose();  // B x F_last
    Matrix dsignals(NB, dpooled.cols());
    for (Index f = 0; f < dpooled.cols(); ++f) {
        Eigen::Map<Matrix> d(dsignals.col(f).data(), N, B);
        d = (Vector::Constant(N, 1.0 / static_cast<double>(N)) * dpooled.col(f).transpose());
    }

    for (std::size_t l = fc.layers.size(); l-- > 0;) {
        const auto& layer = fc.layers[l];
        const auto& shape = model.arch.layers[l];
        const FilterBank& bank = model.params.banks[l];
        const int K1 = shape.order + 1;

        Matrix dpre = layer.activated
                          ? Matrix(dsignals.cwiseProduct(activation_derivative(model.arch.activation, layer.pre)))
                          : dsignals;
        grad.banks[l].taps.noalias() = layer.krylov.transpose() * dpre;
        if (l == 0) break;

        // Back through sum_k C^k x_j with symmetric C, by Horner's rule.
        const Matrix weighted = dpre * bank.taps.transpose();  // (N B) x (F_in (K+1))
        Matrix dinput(NB, shape.in_features);
        for (Index j = 0; j < shape.in_features; ++j) {
            Matrix acc = weighted.col(j * K1 + K1 - 1).reshaped(N, B);
            for (int k = K1 - 2; k >= 0; --k) {
                Matrix next = fc.C * acc;
                next += weighted.col(j * K1 + k).reshaped(N, B);
                acc = std::move(next);
            }
            dinput.col(j) = acc.reshaped(NB, 1);
        }
        dsignals = std::move(dinput);
    }
    return grad;
}

Vector predict(const VnnModel& model, const Matrix& C, const Matrix& X) {
    const Matrix out = forward(model, C, X, false).outputs;
    if (model.arch.task == Task::regression) return out.col(0);
    Vector labels(out.rows());
    for (Index i = 0; i < out.rows(); ++i) {
        Index best = 0;
        for (Index c = 1; c < out.cols(); ++c)
            if (out(i, c) > out(i, best)) best = c;
        labels[i] = static_cast<double>(best);
    }
    return labels;
}

namespace {
constexpr int kFormatVersion = 1;

void write_values(std::ostream& out, const double* data, Index n) {
    char buf[64];
    for (Index i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, " %a", data[i]);
        out << buf;
    }
    out << '\n';
}

void read_values(std::istream& in, double* data, Index n) {
    std::string token;
    for (Index i = 0; i < n; ++i) {
        if (!(in >> token)) fail(ErrorCode::parse, "model payload truncated");
        char* end = nullptr;
        data[i] = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0') fail(ErrorCode::parse, "bad model value '" + token + "'");
    }
}

void expect(std::istream& in, const std::string& word) {
    std::string token;
    if (!(in >> token) || token != word)
        fail(ErrorCode::parse, "model file: expected '" + word + "', found '" + token + "'");
}
}  // namespace

std::string serialize_model(const VnnModel& model) {
    std::ostringstream out;
    const auto& a = model.arch;
    out << "fvnn-model " << kFormatVersion << '\n';
    out << "task " << (a.task == Task::regression ? "regression" : "classification") << '\n';
    out << "activation " << to_string(a.activation) << '\n';
    out << "activate_last " << (a.activate_last ? 1 : 0) << '\n';
    out << "out_dim " << a.out_dim << '\n';
    out << "layers " << a.layers.size() << '\n';
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        const auto& s = a.layers[l];
        out << "layer " << s.in_features << ' ' << s.out_features << ' ' << s.order << '\n';
        out << "taps";
        write_values(out, model.params.banks[l].taps.data(), model.params.banks[l].taps.size());
    }
    out << "readout_weights";
    write_values(out, model.params.readout_weights.data(), model.params.readout_weights.size());
    out << "readout_bias";
    write_values(out, model.params.readout_bias.data(), model.params.readout_bias.size());
    out << "end\n";
    return out.str();
}

VnnModel deserialize_model(const std::string& text) {
    std::istringstream in(text);
    expect(in, "fvnn-model");
    int version = 0;
    in >> version;
    if (version != kFormatVersion) fail(ErrorCode::parse, "unsupported model format version " + std::to_string(version));
    VnnModel model;
    auto& a = model.arch;
    std::string word;
    expect(in, "task");
    in >> word;
    a.task = word == "classification" ? Task::classification : Task::regression;
    expect(in, "activation");
    in >> word;
    a.activation = activation_from_string(word);
    int flag = 1;
    expect(in, "activate_last");
    in >> flag;
    a.activate_last = flag != 0;
    expect(in, "out_dim");
    in >> a.out_dim;
    std::size_t count = 0;
    expect(in, "layers");
    in >> count;
    for (std::size_t l = 0; l < count; ++l) {
        LayerShape s;
        expect(in, "layer");
        in >> s.in_features >> s.out_features >> s.order;
        if (!in) fail(ErrorCode::parse, "model file: bad layer header");
        a.layers.push_back(s);
        FilterBank bank(s.out_features, s.in_features, s.order);
        expect(in, "taps");
        read_values(in, bank.taps.data(), bank.taps.size());
        model.params.banks.push_back(std::move(bank));
    }
    a.validate();
    model.params.readout_weights.resize(a.layers.back().out_features, a.out_dim);
    model.params.readout_bias.resize(a.out_dim);
    expect(in, "readout_weights");
    read_values(in, model.params.readout_weights.data(), model.params.readout_weights.size());
    expect(in, "readout_bias");
    read_values(in, model.params.readout_bias.data(), model.params.readout_bias.size());
    expect(in, "end");
    return model;
}

void save_model(const std::filesystem::path& path, const VnnModel& model) {
    csv::write_text(path, serialize_model(model));
}

VnnModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open model '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

}  // namespace fvnn
