#include "condor/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "condor/errors.hpp"

namespace condor {

void ModelConfig::validate() const {
    if (order != 1 && order != 2) throw std::invalid_argument("model order must be 1 or 2");
    if (dim < 1 || (order == 2 && dim % 2 != 0)) throw std::invalid_argument("invalid task dimension for model order");
    if (code_dim < 0) throw std::invalid_argument("code_dim must be non-negative");
    if (!(dt > 0.0) || !(latent_dt > 0.0)) throw std::invalid_argument("time steps must be positive");
    if (gain_mode == GainMode::adaptive && !(alpha_max > 0.0)) throw std::invalid_argument("alpha_max must be positive");
    if (gain_mode == GainMode::fixed && !(fixed_gain > 0.0)) throw std::invalid_argument("fixed gain must be positive");
    if (arch.hidden_width < 1 || arch.encoder_layers < 1 || arch.decoder_layers < 1 || arch.gain_layers < 1)
        throw std::invalid_argument("invalid architecture");
}

CondorModel CondorModel::create(const ModelConfig& config, const Workspace& workspace, const Vector& goal_original) {
    config.validate();
    if (workspace.dim() != config.dim || goal_original.size() != config.dim)
        throw std::invalid_argument("workspace/goal dimension does not match the model");
    CondorModel m;
    m.config = config;
    m.workspace = workspace;
    m.goal = workspace.normalize(goal_original);

    const int n = config.dim;
    m.encoder_spec = {n + config.code_dim, config.arch.hidden_width, config.arch.encoder_layers, n,
                      nn::OutputActivation::linear};
    m.decoder_spec = {n, config.arch.hidden_width, config.arch.decoder_layers, m.decoder_output_dim(),
                      nn::OutputActivation::linear};
    m.gain_spec = {n, config.arch.hidden_width, config.arch.gain_layers, n, nn::OutputActivation::sigmoid};

    std::mt19937_64 rng(config.seed);
    m.encoder = nn::init_mlp(m.encoder_spec, rng);
    m.decoder = nn::init_mlp(m.decoder_spec, rng);
    if (config.gain_mode == GainMode::adaptive) m.gain = nn::init_mlp(m.gain_spec, rng);
    return m;
}

Vector CondorModel::kinematic_scale() const {
    const int pd = config.dim / 2;
    const Vector h = workspace.half_span();
    return (h.tail(pd).array() / h.head(pd).array()).matrix();
}

Vector CondorModel::kinematic_offset() const {
    const int pd = config.dim / 2;
    const Vector h = workspace.half_span();
    const Vector c = workspace.center();
    return (c.tail(pd).array() / h.head(pd).array()).matrix();
}

void CondorModel::check() const {
    config.validate();
    if (workspace.dim() != config.dim || goal.size() != config.dim)
        throw std::invalid_argument("workspace/goal dimension does not match the model");
    nn::check_layout(encoder_spec, encoder);
    nn::check_layout(decoder_spec, decoder);
    if (config.gain_mode == GainMode::adaptive) {
        nn::check_layout(gain_spec, gain);
    } else if (gain.size() != 0) {
        throw std::invalid_argument("fixed-gain model must not carry a gain network");
    }
    if (encoder_spec.input_dim != config.dim + config.code_dim || encoder_spec.output_dim != config.dim ||
        decoder_spec.input_dim != config.dim || decoder_spec.output_dim != decoder_output_dim())
        throw std::invalid_argument("network specs disagree with the model config");
}

Matrix expand_codes(const CondorModel& model, const Matrix& codes, Eigen::Index rows) {
    const int c = model.code_dim();
    if (c == 0) {
        if (codes.size() != 0) throw std::invalid_argument("model takes no motion code");
        return Matrix(rows, 0);
    }
    if (codes.cols() != c) {
        std::ostringstream msg;
        msg << "motion code must have " << c << " entries";
        throw std::invalid_argument(msg.str());
    }
    if (codes.rows() == rows) return codes;
    if (codes.rows() == 1) return codes.replicate(rows, 1);
    throw std::invalid_argument("code rows must be 1 or match the state rows");
}

namespace {

Matrix encoder_input(const CondorModel& model, const Matrix& states, const Matrix& codes) {
    if (states.cols() != model.dim()) throw std::invalid_argument("state dimension does not match the model");
    const Matrix c = expand_codes(model, codes, states.rows());
    if (c.cols() == 0) return states;
    Matrix in(states.rows(), states.cols() + c.cols());
    in << states, c;
    return in;
}

void require_finite(const Matrix& m, int step, const char* what) {
    if (!m.allFinite()) {
        std::ostringstream msg;
        msg << what << " became non-finite at step " << step;
        throw NumericDivergence(msg.str());
    }
}

}  // namespace

Matrix encode(const CondorModel& model, const Matrix& states, const Matrix& codes) {
    return nn::mlp_eval(model.encoder_spec, model.encoder, encoder_input(model, states, codes));
}

Matrix latent_goal(const CondorModel& model, Eigen::Index rows, const Matrix& codes) {
    const Matrix goals = model.goal.transpose().replicate(rows, 1);
    return encode(model, goals, codes);
}

Matrix gains(const CondorModel& model, const Matrix& latents) {
    if (model.config.gain_mode == GainMode::fixed)
        return Matrix::Constant(latents.rows(), latents.cols(), model.config.fixed_gain);
    return model.config.alpha_max * nn::mlp_eval(model.gain_spec, model.gain, latents);
}

Matrix latent_dynamics(const CondorModel& model, const Matrix& latents, const Matrix& latent_goals) {
    return gains(model, latents).cwiseProduct(latent_goals - latents);
}

Matrix decode(const CondorModel& model, const Matrix& latents) {
    return nn::mlp_eval(model.decoder_spec, model.decoder, latents);
}

Matrix assemble_derivative(const CondorModel& model, const Matrix& states, const Matrix& decoded) {
    if (model.config.order == 1) return decoded;
    const int pd = model.dim() / 2;
    Matrix out(states.rows(), model.dim());
    Matrix pos_rate = states.rightCols(pd).array().rowwise() * model.kinematic_scale().transpose().array();
    pos_rate.rowwise() += model.kinematic_offset().transpose();
    out.leftCols(pd) = pos_rate;
    out.rightCols(pd) = decoded;
    return out;
}

Matrix task_derivative(const CondorModel& model, const Matrix& states, const Matrix& codes) {
    return assemble_derivative(model, states, decode(model, encode(model, states, codes)));
}

Matrix euler_step(const CondorModel& model, const Matrix& states, const Matrix& codes, const FieldTransform& transform) {
    Matrix deriv = task_derivative(model, states, codes);
    if (transform) deriv = transform(states, deriv);
    return clip_rows_to_workspace(states + deriv * model.config.dt);
}

std::vector<Matrix> rollout_task(const CondorModel& model, const Matrix& starts, int horizon, const Matrix& codes,
                                 const FieldTransform& transform) {
    if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
    const Matrix c = expand_codes(model, codes, starts.rows());
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(horizon) + 1);
    out.push_back(clip_rows_to_workspace(starts));
    for (int t = 0; t < horizon; ++t) {
        out.push_back(euler_step(model, out.back(), c, transform));
        require_finite(out.back(), t + 1, "task rollout");
    }
    return out;
}

Matrix rollout_task(const CondorModel& model, const Vector& start, int horizon, const Vector& code) {
    const Matrix codes = code.size() ? Matrix(code.transpose()) : Matrix();
    const auto steps = rollout_task(model, Matrix(start.transpose()), horizon, codes);
    Matrix out(static_cast<Eigen::Index>(steps.size()), model.dim());
    for (std::size_t t = 0; t < steps.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = steps[t].row(0);
    return out;
}

std::vector<Matrix> rollout_latent_free(const CondorModel& model, const Matrix& starts, int horizon,
                                        const Matrix& codes) {
    if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
    const Matrix c = expand_codes(model, codes, starts.rows());
    const Matrix yg = latent_goal(model, starts.rows(), c);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(horizon) + 1);
    out.push_back(encode(model, starts, c));
    for (int t = 0; t < horizon; ++t) {
        out.push_back(out.back() + latent_dynamics(model, out.back(), yg) * model.config.latent_dt);
        require_finite(out.back(), t + 1, "latent rollout");
    }
    return out;
}

RolloutTrace rollout_latent_pair(const CondorModel& model, const Vector& start, int horizon, const Vector& code) {
    if (horizon < 1) throw std::invalid_argument("latent pair rollout needs horizon >= 1");
    const Matrix codes = code.size() ? Matrix(code.transpose()) : Matrix();
    const Matrix x0 = clip_rows_to_workspace(Matrix(start.transpose()));
    RolloutTrace trace;
    trace.task_states = rollout_task(model, Vector(x0.row(0).transpose()), horizon, code);
    trace.latent_task = encode(model, trace.task_states, codes);
    const auto free = rollout_latent_free(model, x0, horizon, codes);
    trace.latent_free.resize(horizon + 1, model.dim());
    for (int t = 0; t <= horizon; ++t) trace.latent_free.row(t) = free[static_cast<std::size_t>(t)].row(0);
    return trace;
}

std::vector<Matrix> map_latent_to_task(const CondorModel& model, const Matrix& starts,
                                       const std::vector<Matrix>& latent_free) {
    std::vector<Matrix> out;
    out.push_back(clip_rows_to_workspace(starts));
    for (std::size_t t = 0; t + 1 < latent_free.size(); ++t) {
        const Matrix& x = out.back();
        const Matrix deriv = assemble_derivative(model, x, decode(model, latent_free[t]));
        out.push_back(clip_rows_to_workspace(x + deriv * model.config.dt));
        require_finite(out.back(), static_cast<int>(t) + 1, "latent-to-task map");
    }
    return out;
}

Matrix map_latent_to_task(const CondorModel& model, const Vector& start, const Matrix& latent_free) {
    std::vector<Matrix> steps;
    for (Eigen::Index t = 0; t < latent_free.rows(); ++t) steps.emplace_back(latent_free.row(t));
    const auto mapped = map_latent_to_task(model, Matrix(start.transpose()), steps);
    Matrix out(static_cast<Eigen::Index>(mapped.size()), model.dim());
    for (std::size_t t = 0; t < mapped.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = mapped[t].row(0);
    return out;
}

Vector interpolate_code(const std::vector<Vector>& codes, const std::vector<double>& weights) {
    if (codes.empty() || codes.size() != weights.size())
        throw std::invalid_argument("need one weight per code");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("interpolation weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("interpolation weights must sum to 1");
    Vector out = Vector::Zero(codes.front().size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (codes[i].size() != out.size()) throw std::invalid_argument("codes differ in width");
        out += weights[i] * codes[i];
    }
    return out;
}

Vector one_hot(int width, int index) {
    if (index < 0 || index >= width) throw std::out_of_range("one-hot index out of range");
    Vector v = Vector::Zero(width);
    v[index] = 1.0;
    return v;
}

BoundModel bind(const CondorModel& model, nn::Tape& tape) {
    BoundModel bm;
    bm.model = &model;
    bm.tape = &tape;
    bm.encoder = model.encoder.bind(tape);
    bm.decoder = model.decoder.bind(tape);
    bm.gain = model.gain.bind(tape);
    return bm;
}

nn::Var encode(const BoundModel& bm, const nn::Var& states, const nn::Var& codes) {
    if (bm.model->code_dim() == 0) return nn::mlp_forward(bm.model->encoder_spec, bm.encoder, states);
    return nn::mlp_forward(bm.model->encoder_spec, bm.encoder, nn::concat_cols(states, codes));
}

nn::Var latent_goal(const BoundModel& bm, Eigen::Index rows, const nn::Var& codes) {
    const nn::Var goals = bm.tape->constant(bm.model->goal.transpose().replicate(rows, 1));
    return encode(bm, goals, codes);
}

nn::Var derivative_from_latent(const BoundModel& bm, const nn::Var& states, const nn::Var& latents) {
    const CondorModel& m = *bm.model;
    const nn::Var decoded = nn::mlp_forward(m.decoder_spec, bm.decoder, latents);
    if (m.config.order == 1) return decoded;
    const int pd = m.dim() / 2;
    const nn::Var vel = nn::slice_cols(states, pd, pd);
    const nn::Var scale_row = bm.tape->constant(m.kinematic_scale().transpose());
    const nn::Var offset_row = bm.tape->constant(m.kinematic_offset().transpose());
    const nn::Var pos_rate = nn::add_row(nn::mul_row(vel, scale_row), offset_row);
    return nn::concat_cols(pos_rate, decoded);
}

nn::Var task_derivative(const BoundModel& bm, const nn::Var& states, const nn::Var& codes) {
    return derivative_from_latent(bm, states, encode(bm, states, codes));
}

nn::Var euler_unclipped_from_latent(const BoundModel& bm, const nn::Var& states, const nn::Var& latents) {
    return nn::add(states, nn::scale(derivative_from_latent(bm, states, latents), bm.model->config.dt));
}

nn::Var euler_unclipped(const BoundModel& bm, const nn::Var& states, const nn::Var& codes) {
    return euler_unclipped_from_latent(bm, states, encode(bm, states, codes));
}

nn::Var latent_step(const BoundModel& bm, const nn::Var& latents, const nn::Var& latent_goals) {
    const CondorModel& m = *bm.model;
    const nn::Var diff = nn::sub(latent_goals, latents);
    nn::Var rate;
    if (m.config.gain_mode == GainMode::fixed) {
        rate = nn::scale(diff, m.config.fixed_gain);
    } else {
        const nn::Var alpha = nn::scale(nn::mlp_forward(m.gain_spec, bm.gain, latents), m.config.alpha_max);
        rate = nn::mul(alpha, diff);
    }
    return nn::add(latents, nn::scale(rate, m.config.latent_dt));
}

ModelGradients collect_gradients(const BoundModel& bm, const nn::Gradients& grads) {
    return {bm.model->encoder.collect(grads, bm.encoder), bm.model->decoder.collect(grads, bm.decoder),
            bm.model->gain.collect(grads, bm.gain)};
}

}  // namespace condor
