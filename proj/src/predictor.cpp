#include "rope/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rope/rng.hpp"

namespace rope {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kVarFloor = 1e-6;

double softplus(double s) { return s > 30.0 ? s : std::log1p(std::exp(s)); }
double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

// Flat parameter layout:
//   W1 [H x I], b1 [H], W2 [H x H], b2 [H], w3 [H], b3,
//   W4 [V x (H+3)], b4 [V], w5 [V], b5
struct Layout {
    int I, H, V, Z;
    std::size_t W1, b1, W2, b2, w3, b3, W4, b4, w5, b5, total;

    Layout(int in, int hidden, int var_hidden) {
        I = in;
        H = hidden;
        V = var_hidden;
        Z = H + 3;
        W1 = 0;
        b1 = W1 + static_cast<std::size_t>(H) * I;
        W2 = b1 + H;
        b2 = W2 + static_cast<std::size_t>(H) * H;
        w3 = b2 + H;
        b3 = w3 + H;
        W4 = b3 + 1;
        b4 = W4 + static_cast<std::size_t>(V) * Z;
        w5 = b4 + V;
        b5 = w5 + V;
        total = b5 + 1;
    }
};

struct ForwardState {
    std::vector<double> xn, h1, h2, z, g;
    double mu = 0.0, s = 0.0, var = 0.0;
};

void forward_pass(const CapnetModel& m, const Layout& L, const std::vector<double>& xn,
                  const std::array<double, 3>& c, ForwardState& st) {
    const double* th = m.theta.data();
    st.xn = xn;
    st.h1.assign(L.H, 0.0);
    for (int i = 0; i < L.H; ++i) {
        double a = th[L.b1 + i];
        for (int j = 0; j < L.I; ++j) a += th[L.W1 + i * L.I + j] * xn[j];
        st.h1[i] = std::tanh(a);
    }
    st.h2.assign(L.H, 0.0);
    for (int i = 0; i < L.H; ++i) {
        double a = th[L.b2 + i];
        for (int j = 0; j < L.H; ++j) a += th[L.W2 + i * L.H + j] * st.h1[j];
        st.h2[i] = std::tanh(a);
    }
    st.mu = th[L.b3];
    for (int j = 0; j < L.H; ++j) st.mu += th[L.w3 + j] * st.h2[j];
    st.z.assign(L.Z, 0.0);
    for (int j = 0; j < L.H; ++j) st.z[j] = st.h2[j];
    for (int j = 0; j < 3; ++j) st.z[L.H + j] = c[j];
    st.g.assign(L.V, 0.0);
    for (int i = 0; i < L.V; ++i) {
        double a = th[L.b4 + i];
        for (int j = 0; j < L.Z; ++j) a += th[L.W4 + i * L.Z + j] * st.z[j];
        st.g[i] = std::tanh(a);
    }
    st.s = th[L.b5];
    for (int j = 0; j < L.V; ++j) st.s += th[L.w5 + j] * st.g[j];
    st.var = softplus(st.s) + kVarFloor;
}

// Accumulates gradients for one sample given dL/dmu and dL/dvar.
void backward_pass(const CapnetModel& m, const Layout& L, const ForwardState& st, double dmu,
                   double dvar, std::vector<double>& grad) {
    const double* th = m.theta.data();
    double* g = grad.data();
    std::vector<double> dh2(L.H, 0.0);

    if (dvar != 0.0) {
        double ds = dvar * sigmoid(st.s);
        g[L.b5] += ds;
        std::vector<double> dg(L.V);
        for (int j = 0; j < L.V; ++j) {
            g[L.w5 + j] += ds * st.g[j];
            dg[j] = ds * th[L.w5 + j];
        }
        for (int i = 0; i < L.V; ++i) {
            double dpre = dg[i] * (1.0 - st.g[i] * st.g[i]);
            g[L.b4 + i] += dpre;
            for (int j = 0; j < L.Z; ++j) g[L.W4 + i * L.Z + j] += dpre * st.z[j];
            for (int j = 0; j < L.H; ++j) dh2[j] += th[L.W4 + i * L.Z + j] * dpre;
        }
    }

    g[L.b3] += dmu;
    for (int j = 0; j < L.H; ++j) {
        g[L.w3 + j] += dmu * st.h2[j];
        dh2[j] += dmu * th[L.w3 + j];
    }
    std::vector<double> dh1(L.H, 0.0);
    for (int i = 0; i < L.H; ++i) {
        double dpre = dh2[i] * (1.0 - st.h2[i] * st.h2[i]);
        g[L.b2 + i] += dpre;
        for (int j = 0; j < L.H; ++j) {
            g[L.W2 + i * L.H + j] += dpre * st.h1[j];
            dh1[j] += th[L.W2 + i * L.H + j] * dpre;
        }
    }
    for (int i = 0; i < L.H; ++i) {
        double dpre = dh1[i] * (1.0 - st.h1[i] * st.h1[i]);
        g[L.b1 + i] += dpre;
        for (int j = 0; j < L.I; ++j) g[L.W1 + i * L.I + j] += dpre * st.xn[j];
    }
}

std::vector<double> standardize(const CapnetModel& m, const std::vector<double>& x) {
    std::vector<double> xn(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) xn[j] = (x[j] - m.x_mean[j]) / m.x_std[j];
    return xn;
}

void init_theta(CapnetModel& m, const Layout& L, Rng& rng) {
    m.theta.assign(L.total, 0.0);
    auto init_block = [&](std::size_t off, int rows, int cols) {
        double bound = std::sqrt(6.0 / (rows + cols));
        for (int i = 0; i < rows * cols; ++i) m.theta[off + i] = rng.uniform(-bound, bound);
    };
    init_block(L.W1, L.H, L.I);
    init_block(L.W2, L.H, L.H);
    init_block(L.w3, 1, L.H);
    init_block(L.W4, L.V, L.Z);
    init_block(L.w5, 1, L.V);
}

void fit_normalization(CapnetModel& m, const std::vector<FeatureVector>& feats,
                       const std::vector<double>& rss, const std::vector<std::size_t>& idx) {
    int I = m.in_dim;
    m.x_mean.assign(I, 0.0);
    m.x_std.assign(I, 0.0);
    for (auto i : idx)
        for (int j = 0; j < I; ++j) m.x_mean[j] += feats[i].x[j];
    for (int j = 0; j < I; ++j) m.x_mean[j] /= static_cast<double>(idx.size());
    for (auto i : idx)
        for (int j = 0; j < I; ++j) {
            double d = feats[i].x[j] - m.x_mean[j];
            m.x_std[j] += d * d;
        }
    for (int j = 0; j < I; ++j) {
        m.x_std[j] = std::sqrt(m.x_std[j] / static_cast<double>(idx.size()));
        if (m.x_std[j] < 1e-9) m.x_std[j] = 1.0;
    }
    double ym = 0.0, ys = 0.0;
    for (auto i : idx) ym += rss[i];
    ym /= static_cast<double>(idx.size());
    for (auto i : idx) ys += (rss[i] - ym) * (rss[i] - ym);
    ys = std::sqrt(ys / static_cast<double>(idx.size()));
    m.y_mean = ym;
    if (ys < 1e-9) {
        m.near_zero_variance_warning = true;
        ys = 1.0;
    }
    m.y_std = ys;
}

// mean NLL over a subset, in original dBm units
double subset_nll(const CapnetModel& m, const std::vector<FeatureVector>& feats,
                  const std::vector<double>& rss, const std::vector<std::size_t>& idx) {
    Layout L(m.in_dim, m.hidden, m.var_hidden);
    ForwardState st;
    double total = 0.0;
    for (auto i : idx) {
        forward_pass(m, L, standardize(m, feats[i].x), feats[i].c, st);
        double mu = m.y_mean + m.y_std * st.mu;
        double var = m.y_std * m.y_std * st.var;
        double r = rss[i] - mu;
        total += 0.5 * std::log(kTwoPi * var) + r * r / (2.0 * var);
    }
    return total / static_cast<double>(idx.size());
}

void collect(const std::vector<LinkRecord>& db, LinkType type, std::vector<FeatureVector>& feats,
             std::vector<double>& rss) {
    for (const auto& r : db) {
        if (r.type != type) continue;
        feats.push_back(features_from_record(r));
        rss.push_back(r.rss);
    }
}

}  // namespace

std::array<double, 3> density_one_hot(DensityLevel level) {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    c[static_cast<int>(level)] = 1.0;
    return c;
}

std::vector<double> v2v_feature_values(const Vec2& pos_t, double h_t, double speed_t,
                                       const Vec2& pos_r, double h_r, double speed_r) {
    double dx = std::abs(pos_t.x - pos_r.x);
    double dy = std::abs(pos_t.y - pos_r.y);
    return {pos_t.x, pos_t.y, pos_r.x,
            pos_r.y, h_t,     h_r,
            std::abs(speed_t - speed_r), dx, dy, std::hypot(dx, dy)};
}

FeatureVector features_from_record(const LinkRecord& r) {
    FeatureVector f;
    if (r.type == LinkType::V2I) {
        f.x = {r.x_t, r.y_t, r.h_t, r.v_t};
    } else {
        f.x = v2v_feature_values({r.x_t, r.y_t}, r.h_t, r.v_t, {r.x_r, r.y_r}, r.h_r, r.v_r);
    }
    f.c = density_one_hot(r.density);
    return f;
}

std::size_t CapnetModel::param_count() const {
    return Layout(in_dim, hidden, var_hidden).total;
}

DataSplit split_622(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(hash_combine(seed, 0x53504c49ULL));
    for (std::size_t i = n; i > 1; --i)
        std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
    DataSplit split;
    std::size_t n_train = std::max<std::size_t>(1, (n * 6) / 10);
    std::size_t n_val = std::max<std::size_t>(1, (n * 2) / 10);
    if (n_train + n_val >= n) {
        n_train = std::max<std::size_t>(1, n > 2 ? n - 2 : n - 1);
        n_val = n > 1 ? 1 : 0;
    }
    split.train.assign(idx.begin(), idx.begin() + n_train);
    split.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    split.test.assign(idx.begin() + n_train + n_val, idx.end());
    if (split.test.empty()) split.test = split.val;
    if (split.val.empty()) split.val = split.train;
    return split;
}

double capnet_loss_grad(const CapnetModel& model, const std::vector<FeatureVector>& feats,
                        const std::vector<double>& rss, std::vector<double>* grad) {
    Layout L(model.in_dim, model.hidden, model.var_hidden);
    if (grad) grad->assign(L.total, 0.0);
    ForwardState st;
    double total = 0.0;
    for (std::size_t i = 0; i < feats.size(); ++i) {
        forward_pass(model, L, standardize(model, feats[i].x), feats[i].c, st);
        double yn = (rss[i] - model.y_mean) / model.y_std;
        double r = yn - st.mu;
        total += 0.5 * std::log(kTwoPi * st.var) + r * r / (2.0 * st.var);
        if (grad) {
            double dmu = -r / st.var;
            double dvar = 0.5 / st.var - r * r / (2.0 * st.var * st.var);
            backward_pass(model, L, st, dmu, dvar, *grad);
        }
    }
    double inv = 1.0 / static_cast<double>(feats.size());
    if (grad)
        for (auto& g : *grad) g *= inv;
    return total * inv;
}

CapnetModel train_capnet(const std::vector<LinkRecord>& db, LinkType link_type,
                         const TrainHyper& hyper, TrainReport* report) {
    std::vector<FeatureVector> feats;
    std::vector<double> rss;
    collect(db, link_type, feats, rss);
    if (feats.empty()) throw std::invalid_argument("train_capnet: no records of requested type");

    CapnetModel m;
    m.link_type = link_type;
    m.in_dim = static_cast<int>(feats[0].x.size());
    m.hidden = hyper.hidden;
    m.var_hidden = hyper.var_hidden;
    Layout L(m.in_dim, m.hidden, m.var_hidden);
    Rng rng(hash_combine(hyper.seed, 0x434150ULL));
    init_theta(m, L, rng);

    DataSplit split = split_622(feats.size(), hyper.seed);
    fit_normalization(m, feats, rss, split.train);

    std::vector<double> best_theta = m.theta;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    std::vector<std::size_t> order = split.train;
    std::vector<double> grad;
    std::vector<FeatureVector> batch_f;
    std::vector<double> batch_y;

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(i)]);
        for (std::size_t off = 0; off < order.size();
             off += static_cast<std::size_t>(hyper.batch_size)) {
            std::size_t end = std::min(order.size(), off + hyper.batch_size);
            batch_f.clear();
            batch_y.clear();
            for (std::size_t i = off; i < end; ++i) {
                batch_f.push_back(feats[order[i]]);
                batch_y.push_back(rss[order[i]]);
            }
            capnet_loss_grad(m, batch_f, batch_y, &grad);
            for (std::size_t p = 0; p < L.total; ++p)
                m.theta[p] -= hyper.learning_rate * grad[p];
        }
        double val = subset_nll(m, feats, rss, split.val);
        if (report) {
            report->train_nll.push_back(subset_nll(m, feats, rss, split.train));
            report->val_nll.push_back(val);
        }
        if (val < best_val) {
            best_val = val;
            best_theta = m.theta;
            best_epoch = epoch;
        }
    }
    m.theta = best_theta;
    if (report) {
        report->best_epoch = best_epoch;
        report->test_nll = subset_nll(m, feats, rss, split.test);
    }
    return m;
}

StrengthDistribution infer_strength(const CapnetModel& model, const FeatureVector& f) {
    if (static_cast<int>(f.x.size()) != model.in_dim)
        throw std::invalid_argument("infer_strength: feature arity mismatch");
    Layout L(model.in_dim, model.hidden, model.var_hidden);
    ForwardState st;
    forward_pass(model, L, standardize(model, f.x), f.c, st);
    return {model.y_mean + model.y_std * st.mu, model.y_std * model.y_std * st.var};
}

double capnet_nll(const CapnetModel& model, const std::vector<FeatureVector>& feats,
                  const std::vector<double>& rss) {
    double total = 0.0;
    for (std::size_t i = 0; i < feats.size(); ++i) {
        auto d = infer_strength(model, feats[i]);
        double r = rss[i] - d.mu;
        total += 0.5 * std::log(kTwoPi * d.var) + r * r / (2.0 * d.var);
    }
    return total / static_cast<double>(feats.size());
}

FixedVarianceModel train_fixed_variance(const std::vector<LinkRecord>& db, LinkType link_type,
                                        const TrainHyper& hyper) {
    std::vector<FeatureVector> feats;
    std::vector<double> rss;
    collect(db, link_type, feats, rss);
    if (feats.empty())
        throw std::invalid_argument("train_fixed_variance: no records of requested type");

    CapnetModel m;
    m.link_type = link_type;
    m.in_dim = static_cast<int>(feats[0].x.size());
    m.hidden = hyper.hidden;
    m.var_hidden = hyper.var_hidden;
    Layout L(m.in_dim, m.hidden, m.var_hidden);
    Rng rng(hash_combine(hyper.seed, 0x464958ULL));
    init_theta(m, L, rng);
    DataSplit split = split_622(feats.size(), hyper.seed);
    fit_normalization(m, feats, rss, split.train);

    std::vector<std::size_t> order = split.train;
    std::vector<double> grad(L.total, 0.0);
    ForwardState st;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(i)]);
        for (std::size_t off = 0; off < order.size();
             off += static_cast<std::size_t>(hyper.batch_size)) {
            std::size_t end = std::min(order.size(), off + hyper.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = off; i < end; ++i) {
                std::size_t k = order[i];
                forward_pass(m, L, standardize(m, feats[k].x), feats[k].c, st);
                double yn = (rss[k] - m.y_mean) / m.y_std;
                backward_pass(m, L, st, st.mu - yn, 0.0, grad);
            }
            double inv = hyper.learning_rate / static_cast<double>(end - off);
            for (std::size_t p = 0; p < L.total; ++p) m.theta[p] -= inv * grad[p];
        }
    }
    double resid = 0.0;
    for (auto i : split.train) {
        forward_pass(m, L, standardize(m, feats[i].x), feats[i].c, st);
        double mu = m.y_mean + m.y_std * st.mu;
        resid += (rss[i] - mu) * (rss[i] - mu);
    }
    resid /= static_cast<double>(split.train.size());
    return {m, std::max(resid, kVarFloor)};
}

double fixed_variance_nll(const FixedVarianceModel& model, const std::vector<FeatureVector>& feats,
                          const std::vector<double>& rss) {
    Layout L(model.mean_model.in_dim, model.mean_model.hidden, model.mean_model.var_hidden);
    ForwardState st;
    double total = 0.0;
    for (std::size_t i = 0; i < feats.size(); ++i) {
        forward_pass(model.mean_model, L, standardize(model.mean_model, feats[i].x), feats[i].c,
                     st);
        double mu = model.mean_model.y_mean + model.mean_model.y_std * st.mu;
        double r = rss[i] - mu;
        total += 0.5 * std::log(kTwoPi * model.var) + r * r / (2.0 * model.var);
    }
    return total / static_cast<double>(feats.size());
}

void save_model(const CapnetModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    char buf[64];
    auto hex = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%a", v);
        return std::string(buf);
    };
    out << "# rope-capnet v1\n";
    out << "link_type " << to_string(model.link_type) << "\n";
    out << "dims " << model.in_dim << " " << model.hidden << " " << model.var_hidden << "\n";
    out << "x_mean";
    for (double v : model.x_mean) out << " " << hex(v);
    out << "\nx_std";
    for (double v : model.x_std) out << " " << hex(v);
    out << "\ny " << hex(model.y_mean) << " " << hex(model.y_std) << "\n";
    out << "warning " << (model.near_zero_variance_warning ? 1 : 0) << "\n";
    out << "theta " << model.theta.size() << "\n";
    for (std::size_t i = 0; i < model.theta.size(); ++i)
        out << hex(model.theta[i]) << ((i + 1) % 8 == 0 ? "\n" : " ");
    out << "\n";
}

CapnetModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    CapnetModel m;
    // values are stored as %a hexfloats, which stream extraction does not
    // parse; go through strtod instead
    auto parse = [](const std::string& tok) { return std::strtod(tok.c_str(), nullptr); };
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string key, tok;
        ss >> key;
        if (key == "link_type") {
            std::string t;
            ss >> t;
            m.link_type = t == "V2I" ? LinkType::V2I : LinkType::V2V;
        } else if (key == "dims") {
            ss >> m.in_dim >> m.hidden >> m.var_hidden;
        } else if (key == "x_mean") {
            m.x_mean.clear();
            while (ss >> tok) m.x_mean.push_back(parse(tok));
        } else if (key == "x_std") {
            m.x_std.clear();
            while (ss >> tok) m.x_std.push_back(parse(tok));
        } else if (key == "y") {
            ss >> tok;
            m.y_mean = parse(tok);
            ss >> tok;
            m.y_std = parse(tok);
        } else if (key == "warning") {
            int w;
            ss >> w;
            m.near_zero_variance_warning = w != 0;
        } else if (key == "theta") {
            std::size_t n;
            ss >> n;
            m.theta.clear();
            m.theta.reserve(n);
            while (m.theta.size() < n && in >> tok) m.theta.push_back(parse(tok));
            if (m.theta.size() != n) throw std::runtime_error("load_model: truncated theta");
        }
    }
    if (m.theta.size() != m.param_count())
        throw std::runtime_error("load_model: parameter count mismatch");
    return m;
}

double knn_predict(const std::vector<LinkRecord>& db, const FeatureVector& f, int k) {
    if (db.empty()) throw std::invalid_argument("knn_predict: empty database");
    LinkType want = f.x.size() == 4 ? LinkType::V2I : LinkType::V2V;
    std::vector<FeatureVector> feats;
    std::vector<double> rss;
    collect(db, want, feats, rss);
    if (feats.empty()) throw std::invalid_argument("knn_predict: no records of matching arity");
    if (k < 1 || static_cast<std::size_t>(k) > feats.size())
        throw std::invalid_argument("knn_predict: k out of range");

    std::size_t dim = feats[0].x.size();
    std::vector<double> mean(dim, 0.0), stdev(dim, 0.0);
    for (const auto& fv : feats)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += fv.x[j];
    for (std::size_t j = 0; j < dim; ++j) mean[j] /= static_cast<double>(feats.size());
    for (const auto& fv : feats)
        for (std::size_t j = 0; j < dim; ++j) {
            double d = fv.x[j] - mean[j];
            stdev[j] += d * d;
        }
    for (std::size_t j = 0; j < dim; ++j) {
        stdev[j] = std::sqrt(stdev[j] / static_cast<double>(feats.size()));
        if (stdev[j] < 1e-9) stdev[j] = 1.0;
    }

    std::vector<std::pair<double, std::size_t>> dist(feats.size());
    for (std::size_t i = 0; i < feats.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            double d = (feats[i].x[j] - f.x[j]) / stdev[j];
            d2 += d * d;
        }
        dist[i] = {d2, i};
    }
    std::sort(dist.begin(), dist.end());
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += rss[dist[i].second];
    return sum / static_cast<double>(k);
}

PredictedMotion extrapolate_motion(const std::vector<VehicleState>& history, double tau,
                                   double horizon) {
    if (history.size() < 2)
        throw std::invalid_argument("extrapolate_motion: history too short");
    if (!(tau > 0.0)) throw std::invalid_argument("extrapolate_motion: tau must be > 0");
    const auto& last = history.back();
    const auto& prev = history[history.size() - 2];
    Vec2 accel = (last.velocity - prev.velocity) * (1.0 / tau);
    PredictedMotion out;
    out.position = last.position + last.velocity * horizon + accel * (0.5 * horizon * horizon);
    out.velocity = last.velocity + accel * horizon;
    return out;
}

PredictedMotion predict_mobility(const std::vector<VehicleState>& history, double tau,
                                 double horizon, const WorldMap& map) {
    PredictedMotion out = extrapolate_motion(history, tau, horizon);
    out.position = snap_to_road(map, out.position);
    return out;
}

}  // namespace rope
