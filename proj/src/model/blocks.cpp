#include "nltrack/model/blocks.hpp"

#include <cmath>

#include "nltrack/common.hpp"

namespace nltrack::model {

namespace {

ag::Var linear(ParamBinder& p, const std::string& prefix, ag::Var x) {
    return ag::add_rowvec(ag::matmul(x, p[prefix + ".w"]), p[prefix + ".b"]);
}

void register_linear(ParamStore& store, const std::string& prefix, int in, int out,
                     ParamGroup group) {
    store.add(prefix + ".w", in, out, Init::gaussian(), group);
    store.add(prefix + ".b", 1, out, Init::zero(), group);
}

ag::Var norm(ParamBinder& p, const std::string& prefix, ag::Var x) {
    return ag::layer_norm(x, p[prefix + ".g"], p[prefix + ".b"]);
}

ag::Var ffn(ParamBinder& p, const std::string& prefix, ag::Var x) {
    return linear(p, prefix + ".fc2", ag::relu(linear(p, prefix + ".fc1", x)));
}

}  // namespace

void register_attention(ParamStore& store, const std::string& prefix, int d,
                        ParamGroup group) {
    register_linear(store, prefix + ".q", d, d, group);
    register_linear(store, prefix + ".k", d, d, group);
    register_linear(store, prefix + ".v", d, d, group);
    register_linear(store, prefix + ".o", d, d, group);
}

void register_layer_norm(ParamStore& store, const std::string& prefix, int d,
                         ParamGroup group) {
    store.add(prefix + ".g", 1, d, Init::one(), group);
    store.add(prefix + ".b", 1, d, Init::zero(), group);
}

void register_encoder_layer(ParamStore& store, const std::string& prefix, int d,
                            int ffn_ratio, ParamGroup group) {
    register_layer_norm(store, prefix + ".ln1", d, group);
    register_attention(store, prefix + ".attn", d, group);
    register_layer_norm(store, prefix + ".ln2", d, group);
    register_linear(store, prefix + ".fc1", d, d * ffn_ratio, group);
    register_linear(store, prefix + ".fc2", d * ffn_ratio, d, group);
}

void register_cross_layer(ParamStore& store, const std::string& prefix, int d,
                          int ffn_ratio, ParamGroup group) {
    register_layer_norm(store, prefix + ".ln1", d, group);
    register_attention(store, prefix + ".xattn", d, group);
    register_layer_norm(store, prefix + ".ln2", d, group);
    register_linear(store, prefix + ".fc1", d, d * ffn_ratio, group);
    register_linear(store, prefix + ".fc2", d * ffn_ratio, d, group);
}

ag::Var multi_head_attention(ParamBinder& params, const std::string& prefix,
                             ag::Var q, ag::Var kv,
                             const std::vector<std::uint8_t>& key_mask, int n_heads) {
    const int d = q.cols();
    if (d != kv.cols() || d % n_heads != 0)
        fail(ErrorCode::shape_error, "attention dims incompatible");
    const int dh = d / n_heads;

    ag::Var qp = linear(params, prefix + ".q", q);
    ag::Var kp = linear(params, prefix + ".k", kv);
    ag::Var vp = linear(params, prefix + ".v", kv);

    std::vector<ag::Var> contexts;
    contexts.reserve(static_cast<std::size_t>(n_heads));
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int h = 0; h < n_heads; ++h) {
        ag::Var qh = ag::slice_cols(qp, h * dh, (h + 1) * dh);
        ag::Var kh = ag::slice_cols(kp, h * dh, (h + 1) * dh);
        ag::Var vh = ag::slice_cols(vp, h * dh, (h + 1) * dh);
        ag::Var scores = ag::scale(ag::matmul_nt(qh, kh), inv_sqrt_dh);
        ag::Var weights = ag::softmax_rows(scores, key_mask);
        contexts.push_back(ag::matmul(weights, vh));
    }
    return linear(params, prefix + ".o", ag::concat_cols(contexts));
}

ag::Var encoder_layer(ParamBinder& params, const std::string& prefix, ag::Var x,
                      const std::vector<std::uint8_t>& key_mask, int n_heads) {
    ag::Var n1 = norm(params, prefix + ".ln1", x);
    ag::Var a = ag::add(x, multi_head_attention(params, prefix + ".attn", n1, n1,
                                                key_mask, n_heads));
    return ag::add(a, ffn(params, prefix, norm(params, prefix + ".ln2", a)));
}

ag::Var cross_layer(ParamBinder& params, const std::string& prefix, ag::Var q,
                    ag::Var kv, const std::vector<std::uint8_t>& key_mask,
                    int n_heads) {
    ag::Var n1 = norm(params, prefix + ".ln1", q);
    ag::Var a = ag::add(q, multi_head_attention(params, prefix + ".xattn", n1, kv,
                                                key_mask, n_heads));
    return ag::add(a, ffn(params, prefix, norm(params, prefix + ".ln2", a)));
}

ag::Var final_norm(ParamBinder& params, const std::string& prefix, ag::Var x) {
    return norm(params, prefix, x);
}

void register_encoder_stack(ParamStore& store, const std::string& prefix, int d,
                            int n_layers, int ffn_ratio, ParamGroup group) {
    for (int l = 0; l < n_layers; ++l)
        register_encoder_layer(store, prefix + ".l" + std::to_string(l), d, ffn_ratio,
                               group);
    if (n_layers > 0) register_layer_norm(store, prefix + ".norm", d, group);
}

ag::Var encoder_stack(ParamBinder& params, const std::string& prefix, ag::Var x,
                      const std::vector<std::uint8_t>& key_mask, int n_layers,
                      int n_heads) {
    for (int l = 0; l < n_layers; ++l)
        x = encoder_layer(params, prefix + ".l" + std::to_string(l), x, key_mask,
                          n_heads);
    if (n_layers > 0) x = final_norm(params, prefix + ".norm", x);
    return x;
}

void register_cross_stack(ParamStore& store, const std::string& prefix, int d,
                          int n_layers, int ffn_ratio, ParamGroup group) {
    for (int l = 0; l < n_layers; ++l)
        register_cross_layer(store, prefix + ".l" + std::to_string(l), d, ffn_ratio,
                             group);
    if (n_layers > 0) register_layer_norm(store, prefix + ".norm", d, group);
}

ag::Var cross_stack(ParamBinder& params, const std::string& prefix, ag::Var q,
                    ag::Var kv, const std::vector<std::uint8_t>& key_mask,
                    int n_layers, int n_heads) {
    for (int l = 0; l < n_layers; ++l)
        q = cross_layer(params, prefix + ".l" + std::to_string(l), q, kv, key_mask,
                        n_heads);
    if (n_layers > 0) q = final_norm(params, prefix + ".norm", q);
    return q;
}

}  // namespace nltrack::model
