#include "elf/sfen/train.hpp"

#include <cmath>
#include <filesystem>

#include "elf/error.hpp"
#include "elf/io/loss_log.hpp"

namespace elf::sfen {

namespace {

void shuffle_indices(std::vector<size_t>& v, nn::Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = rng.uniform_int(i);
    std::swap(v[i - 1], v[j]);
  }
}

struct BatchItem {
  size_t clip = 0;
  int64_t offset = 0;       // samples, hop-aligned
  nn::Tensor noise;         // [H, T_frames]
  nn::Tensor mel;           // [T_frames, n_mels]
  std::vector<float> segment;
};

void check_finite(double v, const char* term, uint64_t step, const std::string& clip_id) {
  if (!std::isfinite(v)) {
    raise(ErrorKind::kDomain, std::string("non-finite loss in term '") + term + "' at step " +
                                  std::to_string(step) + " (clip " + clip_id + ")");
  }
}

}  // namespace

SfenLossGraph build_sfen_generator_graph(nn::Tape& t, SfenModel& model, const nn::Tensor& mel,
                                         const std::vector<float>& segment,
                                         const nn::Tensor& noise) {
  const auto& analyzer = model.analyzer();
  nn::Var s = t.constant(mel);
  auto [mu, ls] = model.encoder().forward(t, s);
  nn::Var sigma = nn::clamp_min(nn::exp_op(ls), model.config().sigma_floor);
  nn::Var z = nn::add(mu, nn::mul(sigma, t.constant(noise)));
  nn::Var y_hat = model.decoder().forward(t, z);
  nn::Var s_hat = analyzer.log_mel(t, y_hat);

  SfenLossGraph g;
  g.recon = nn::mean(nn::abs_op(nn::sub(s, s_hat)));
  g.kl = nn::mean(nn::scale(
      nn::add_scalar(nn::sub(nn::add(nn::mul(mu, mu), nn::mul(sigma, sigma)),
                             nn::scale(nn::log_op(sigma), 2.f)),
                     -1.f),
      0.5f));

  const bool grads_were_enabled = t.grad_enabled();
  t.set_grad_enabled(false);  // discriminator frozen; grads still flow to y_hat
  nn::Var y = t.constant(nn::Tensor({static_cast<int64_t>(segment.size())}, segment));
  DiscOutputs real = model.discriminators().forward(t, y);
  DiscOutputs fake = model.discriminators().forward(t, y_hat);
  t.set_grad_enabled(grads_were_enabled);

  g.adv = lsgan_gen_adv_t(fake);
  g.fm = feature_matching_t(real, fake);
  g.total = nn::add(nn::add(g.adv, g.fm),
                    nn::add(nn::scale(g.recon, model.config().lambda_sf), g.kl));
  return g;
}

void save_sfen_checkpoint(const std::string& path, SfenModel& model, uint64_t step,
                          const std::string& config_json,
                          const std::array<uint64_t, 4>& rng_state) {
  io::Checkpoint ckpt;
  ckpt.model_kind = "sfen";
  ckpt.step = step;
  ckpt.config_json = config_json;
  ckpt.rng_state = rng_state;
  io::pack_params(ckpt, model.gen_params(), true);
  io::pack_params(ckpt, model.disc_params(), true);
  const std::string tmp = path + ".tmp";
  io::save_checkpoint(tmp, ckpt);
  std::filesystem::rename(tmp, path);
}

uint64_t train_sfen(SfenModel& model, const std::vector<TrainClip>& clips,
                    const SfenTrainOptions& opts) {
  ELF_CHECK(!clips.empty(), ErrorKind::kInput, "train_sfen: empty clip list");
  const int64_t seg = model.config().segment_samples;
  const int hop = model.mel_config().hop_size;
  for (const auto& c : clips) {
    ELF_CHECK(static_cast<int64_t>(c.samples.size()) >= seg, ErrorKind::kInput,
              "train_sfen: clip " + c.clip_id + " shorter than segment_samples");
  }
  const int64_t frames = seg / hop;
  const int H = model.config().latent_dim;

  nn::AdamW opt_g(model.gen_params(), opts.optimizer);
  nn::AdamW opt_d(model.disc_params(), opts.optimizer);
  nn::Rng rng(opts.seed);
  uint64_t step = 0;

  if (!opts.resume_from.empty()) {
    io::Checkpoint ckpt = io::load_checkpoint(opts.resume_from, "sfen");
    io::unpack_params(ckpt, model.gen_params(), true);
    io::unpack_params(ckpt, model.disc_params(), true);
    step = ckpt.step;
    rng.set_state(ckpt.rng_state);
    opt_g.set_step_count(static_cast<int64_t>(step));
    opt_d.set_step_count(static_cast<int64_t>(step));
  }

  io::LossLog log;
  if (!opts.loss_log_path.empty()) log = io::LossLog(opts.loss_log_path, !opts.resume_from.empty());

  const int batch = std::max(1, opts.batch_size);
  const uint64_t steps_per_epoch =
      (clips.size() + static_cast<size_t>(batch) - 1) / static_cast<size_t>(batch);
  std::vector<size_t> order(clips.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle_indices(order, rng);
  size_t cursor = 0;

  const float inv_batch = 1.f / static_cast<float>(batch);
  const auto& analyzer = model.analyzer();

  while (step < static_cast<uint64_t>(opts.max_steps)) {
    ++step;
    const uint64_t epoch = (step - 1) / steps_per_epoch;
    const float lr = opts.optimizer.lr *
                     static_cast<float>(std::pow(static_cast<double>(opts.lr_decay),
                                                 static_cast<double>(epoch)));
    opt_g.set_lr(lr);
    opt_d.set_lr(lr);

    // Draw the batch (clip, offset, noise) up front so both the discriminator
    // and generator passes see identical data.
    std::vector<BatchItem> items(static_cast<size_t>(batch));
    for (auto& it : items) {
      if (cursor >= order.size()) {
        shuffle_indices(order, rng);
        cursor = 0;
      }
      it.clip = order[cursor++];
      const TrainClip& c = clips[it.clip];
      const int64_t max_hops = (static_cast<int64_t>(c.samples.size()) - seg) / hop;
      it.offset = static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(max_hops + 1))) * hop;
      it.noise = nn::Tensor({H, frames});
      rng.fill_normal(it.noise.vec());
      it.segment.assign(c.samples.begin() + it.offset, c.samples.begin() + it.offset + seg);
      it.mel = analyzer.log_mel(it.segment);
    }

    std::map<std::string, double> stats{{"d_loss", 0}, {"adv", 0},     {"fm", 0},
                                        {"recon", 0},  {"kl", 0},      {"g_total", 0},
                                        {"lr", lr}};

    // ---- discriminator step ----
    opt_d.zero_grad();
    for (const auto& it : items) {
      nn::Tape t;
      t.set_grad_enabled(false);  // generator frozen: fake is detached
      auto [mu, ls] = model.encoder().forward(t, t.constant(it.mel));
      nn::Var sigma = nn::clamp_min(nn::exp_op(ls), model.config().sigma_floor);
      nn::Var z = nn::add(mu, nn::mul(sigma, t.constant(it.noise)));
      nn::Var y_hat = model.decoder().forward(t, z);
      t.set_grad_enabled(true);
      nn::Var y = t.constant(nn::Tensor({seg}, it.segment));
      DiscOutputs real = model.discriminators().forward(t, y);
      DiscOutputs fake = model.discriminators().forward(t, y_hat);
      nn::Var loss = lsgan_disc_loss_t(real, fake);
      const double v = loss.val().item();
      check_finite(v, "d_loss", step, clips[it.clip].clip_id);
      stats["d_loss"] += v * inv_batch;
      t.backward(nn::scale(loss, inv_batch));
    }
    opt_d.step();

    // ---- generator step ----
    opt_g.zero_grad();
    for (const auto& it : items) {
      nn::Tape t;
      SfenLossGraph g = build_sfen_generator_graph(t, model, it.mel, it.segment, it.noise);

      const char* names[] = {"adv", "fm", "recon", "kl", "g_total"};
      const nn::Var* vars[] = {&g.adv, &g.fm, &g.recon, &g.kl, &g.total};
      for (int i = 0; i < 5; ++i) {
        const double v = vars[i]->val().item();
        check_finite(v, names[i], step, clips[it.clip].clip_id);
        stats[names[i]] += v * inv_batch;
      }
      t.backward(nn::scale(g.total, inv_batch));
    }
    opt_g.step();

    for (const auto& [term, value] : stats) log.log(step, term, value);
    if (opts.on_step) opts.on_step(step, stats);

    if (!opts.checkpoint_path.empty() && opts.checkpoint_interval > 0 &&
        (step % static_cast<uint64_t>(opts.checkpoint_interval) == 0 ||
         step == static_cast<uint64_t>(opts.max_steps))) {
      log.flush();
      save_sfen_checkpoint(opts.checkpoint_path, model, step, opts.config_snapshot_json,
                           rng.state());
    }
  }
  log.flush();
  return step;
}

}  // namespace elf::sfen
