#include "dedem/fracture/propagation.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace dedem::fracture {

const geometry::CrackPath& active_crack(const config::Scenario& sc) {
  const geometry::CrackPath* c = nullptr;
  if (!sc.sif.crack_id.empty()) {
    c = sc.find_crack(sc.sif.crack_id);
    if (c == nullptr) throw Error("fracture_post", "unknown crack '" + sc.sif.crack_id + "'");
  } else if (sc.cracks.size() == 1) {
    c = &sc.cracks.front();
  } else {
    throw Error("fracture_post", "scenario has " + std::to_string(sc.cracks.size()) +
                                     " cracks; set sif.crack");
  }
  if (c->tip_count() != 1) {
    throw Error("fracture_post", "crack '" + c->id() + "' must have exactly one tip to propagate");
  }
  return *c;
}

config::Scenario with_crack(const config::Scenario& sc, const geometry::CrackPath& crack) {
  config::Scenario out = sc;
  for (auto& c : out.cracks) {
    if (c.id() == crack.id()) {
      c = crack;
      return out;
    }
  }
  throw Error("fracture_post", "unknown crack '" + crack.id() + "'");
}

PropagationState propagate(const config::Scenario& sc, const PropagationOptions& opt) {
  if (opt.steps < 0) throw Error("fracture_post", "step count must be >= 0");
  if (!(opt.step_length > 0.0)) throw Error("fracture_post", "step length must be positive");
  PropagationState st;
  const geometry::CrackPath& first = active_crack(sc);
  st.crack_id = first.id();
  st.step_length = opt.step_length;
  st.history.push_back(first);
  config::Scenario cur = sc;
  if (opt.max_epochs > 0) cur.train.max_epochs = opt.max_epochs;
  cur.train.patience = std::min(cur.train.patience, cur.train.max_epochs);

  std::optional<nn::ParamVector> base = opt.initial_params;
  for (int k = 0; k < opt.steps; ++k) {
    const geometry::CrackPath crack = st.history.back();
    cur = with_crack(cur, crack);
    PropagationStep step;
    step.step = k;
    step.warm_started = base.has_value();
    optim::Solution sol;
    try {
      sol = optim::solve(cur, base, opt.on_epoch);
    } catch (const Error& e) {
      throw Error(e.module(), "propagation step " + std::to_string(k) + ": " + e.what());
    }
    if (k == 0) base = sol.report.best_params;
    const TipSif t = extract_sif(sol.report.best_params, sol.space, cur, crack);
    const geometry::TipEnd end = t.tip;
    step.tip = crack.endpoint(end);
    step.crack_length = crack.length();
    step.sif = t.sif;
    step.k1 = t.sif.k1;
    step.k2 = t.sif.k2;
    step.kink = kink_angle(step.k1, step.k2);
    const Vec2 out = crack.outward_tangent(end);
    step.global_angle = std::atan2(out.y(), out.x()) + step.kink;
    step.report = std::move(sol.report);
    step.params = step.report.best_params;
    st.steps.push_back(std::move(step));
    const PropagationStep& done = st.steps.back();

    const Vec2 next = done.tip + opt.step_length * Vec2(std::cos(done.global_angle),
                                                         std::sin(done.global_angle));
    if (!sc.domain.contains(next) || sc.domain.on_boundary(next, 1e-12 * sc.domain.diagonal())) {
      st.left_domain = true;
      if (opt.on_step) opt.on_step(done, st);
      break;
    }
    st.history.push_back(crack.extended(end, next));
    if (opt.on_step && !opt.on_step(done, st)) break;
  }
  return st;
}

void write_sif_csv(const std::filesystem::path& path, const std::vector<int>& step,
                   const std::vector<double>& a, const std::vector<SifResult>& sifs) {
  if (step.size() != sifs.size() || a.size() != sifs.size()) {
    throw Error("fracture_post", "SIF report columns differ in length");
  }
  std::ofstream out(path);
  if (!out) throw Error("fracture_post", "cannot write '" + path.string() + "'");
  out.precision(17);
  out << "step,a,K1,K2,R2_1,R2_2,window_lo,window_hi\n";
  for (std::size_t i = 0; i < sifs.size(); ++i) {
    const SifResult& s = sifs[i];
    out << step[i] << ',' << a[i] << ',' << s.k1 << ',' << s.k2 << ',' << s.fit1.r2 << ','
        << s.fit2.r2 << ',' << s.window_lo << ',' << s.window_hi << '\n';
  }
  if (!out) throw Error("fracture_post", "failed writing '" + path.string() + "'");
}

void write_path_csv(const PropagationState& state, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("fracture_post", "cannot write '" + path.string() + "'");
  out.precision(17);
  out << "step,tip_x,tip_y,theta_c_deg\n";
  for (const auto& s : state.steps) {
    out << s.step << ',' << s.tip.x() << ',' << s.tip.y() << ','
        << s.kink * 180.0 / std::numbers::pi << '\n';
  }
  if (!out) throw Error("fracture_post", "failed writing '" + path.string() + "'");
}

}  // namespace dedem::fracture
