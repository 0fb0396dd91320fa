#include "splaynet/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace splaynet {

WorkloadSpec WorkloadSpec::parse(const std::string& text, std::size_t m) {
    WorkloadSpec spec;
    spec.m = m;
    if (text == "uniform") {
        spec.kind = WorkloadKind::Uniform;
    } else if (text.rfind("zipf:", 0) == 0) {
        spec.kind = WorkloadKind::Zipf;
        spec.zipf_alpha = std::stod(text.substr(5));
        if (spec.zipf_alpha <= 0) throw std::invalid_argument("zipf alpha must be > 0");
    } else if (text.rfind("product:", 0) == 0) {
        spec.kind = WorkloadKind::Product;
        spec.file = text.substr(8);
    } else if (text.rfind("trace:", 0) == 0) {
        spec.kind = WorkloadKind::Trace;
        spec.file = text.substr(6);
    } else {
        throw std::invalid_argument("unknown workload: " + text);
    }
    return spec;
}

std::string WorkloadSpec::label() const {
    switch (kind) {
        case WorkloadKind::Uniform: return "uniform";
        case WorkloadKind::Zipf: {
            std::ostringstream os;
            os << "zipf:" << zipf_alpha;
            return os.str();
        }
        case WorkloadKind::Product: return "product:" + file;
        case WorkloadKind::Trace: return "trace:" + file;
    }
    return "?";
}

namespace {

// Inverse-CDF sampler over explicit weights.
class WeightedSampler {
public:
    explicit WeightedSampler(std::vector<double> weights) : cdf_(std::move(weights)) {
        double acc = 0.0;
        for (double& w : cdf_) {
            acc += w;
            w = acc;
        }
        if (acc <= 0.0) throw std::invalid_argument("weights must have positive mass");
        for (double& w : cdf_) w /= acc;
        cdf_.back() = 1.0;
    }

    std::size_t draw(std::mt19937_64& rng) const {
        double x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return static_cast<std::size_t>(
            std::lower_bound(cdf_.begin(), cdf_.end(), x) - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

std::vector<double> zipf_weights(std::size_t n, double alpha) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), alpha);
    return w;
}

// product file: `id,src_weight,dst_weight` per line, `#` comments
void load_product_weights(const std::string& path, const std::vector<NodeId>& ids,
                          std::vector<double>& src_w, std::vector<double>& dst_w) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open product file: " + path);
    std::unordered_map<NodeId, std::size_t> pos;
    for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;
    src_w.assign(ids.size(), 0.0);
    dst_w.assign(ids.size(), 0.0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        std::string a, b, c;
        if (!std::getline(is, a, ',') || !std::getline(is, b, ',') || !std::getline(is, c)) {
            throw std::runtime_error("product file line " + std::to_string(lineno) +
                                     ": expected id,src_weight,dst_weight");
        }
        NodeId id = static_cast<NodeId>(std::stoul(a));
        auto it = pos.find(id);
        if (it == pos.end())
            throw std::runtime_error("product file line " + std::to_string(lineno) +
                                     ": unknown node id");
        src_w[it->second] = std::stod(b);
        dst_w[it->second] = std::stod(c);
    }
}

std::vector<std::uint64_t> arrival_slots(const WorkloadSpec& spec, std::size_t m,
                                         std::mt19937_64& rng) {
    std::vector<std::uint64_t> slots(m, 0);
    if (spec.arrival == ArrivalKind::Poisson) {
        std::exponential_distribution<double> gap(spec.poisson_rate);
        double tme = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            tme += gap(rng);
            slots[i] = static_cast<std::uint64_t>(tme);
        }
    }
    return slots;
}

}  // namespace

RequestSet generate(const WorkloadSpec& spec, const std::vector<NodeId>& ids,
                    std::uint64_t seed) {
    if (ids.size() < 2) throw std::invalid_argument("need at least 2 nodes");
    if (spec.m < 1) throw std::invalid_argument("m must be >= 1");
    if (spec.kind == WorkloadKind::Trace) return load_trace(spec.file, ids);

    std::mt19937_64 rng(seed);
    std::vector<double> src_w, dst_w;
    switch (spec.kind) {
        case WorkloadKind::Uniform:
            src_w.assign(ids.size(), 1.0);
            dst_w.assign(ids.size(), 1.0);
            break;
        case WorkloadKind::Zipf:
            src_w = zipf_weights(ids.size(), spec.zipf_alpha);
            dst_w = src_w;
            break;
        case WorkloadKind::Product:
            load_product_weights(spec.file, ids, src_w, dst_w);
            break;
        case WorkloadKind::Trace:
            break;
    }
    WeightedSampler src_s(src_w), dst_s(dst_w);

    RequestSet rs;
    rs.requests.reserve(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) {
        NodeId s, d;
        do {
            s = ids[src_s.draw(rng)];
            d = ids[dst_s.draw(rng)];
        } while (s == d);
        rs.requests.push_back({s, d, 0});
    }
    std::vector<std::uint64_t> slots = arrival_slots(spec, spec.m, rng);
    for (std::size_t i = 0; i < spec.m; ++i) rs.requests[i].arrival_slot = slots[i];
    return rs;
}

RequestSet load_trace(const std::string& path, const std::vector<NodeId>& ids) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    std::unordered_map<NodeId, bool> known;
    for (NodeId id : ids) known[id] = true;

    RequestSet rs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line;
        stripped.erase(0, stripped.find_first_not_of(" \t\r"));
        if (stripped.empty() || stripped[0] == '#') continue;
        std::istringstream is(stripped);
        std::string a, b, c;
        std::getline(is, a, ',');
        bool has_b = static_cast<bool>(std::getline(is, b, ','));
        bool has_c = static_cast<bool>(std::getline(is, c));
        auto fail = [&](const std::string& why) {
            throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + why);
        };
        if (!has_b) fail("expected src,dst[,arrival_slot]");
        SplayRequest req;
        try {
            req.src = static_cast<NodeId>(std::stoul(a));
            req.dst = static_cast<NodeId>(std::stoul(b));
            req.arrival_slot = has_c ? std::stoull(c) : 0;
        } catch (const std::exception&) {
            fail("malformed number");
        }
        if (req.src == req.dst) fail("src equals dst");
        if (!known.count(req.src)) fail("unknown src id " + a);
        if (!known.count(req.dst)) fail("unknown dst id " + b);
        rs.requests.push_back(req);
    }
    return rs;
}

EntropyPair empirical_entropy(const RequestSet& rs) {
    auto entropy = [&](bool sources) {
        std::unordered_map<NodeId, std::size_t> freq;
        for (const SplayRequest& r : rs.requests) ++freq[sources ? r.src : r.dst];
        double m = static_cast<double>(rs.requests.size());
        double h = 0.0;
        for (const auto& [id, count] : freq) {
            (void)id;
            double f = static_cast<double>(count) / m;
            if (f > 0.0) h -= f * std::log2(f);
        }
        return h;
    };
    return {entropy(true), entropy(false)};
}

}  // namespace splaynet
