"""Train the multimodal classifier on synthetic panels, end to end.

The generator draws a latent state per firm, emits saturated noisy
fundamentals (always observed) and a sparse text vector (training-time
only), and labels firms through the latent state. The model trains on
both views plus the labels but scores from fundamentals alone, so at
test time it covers every row, including the ones where text-dependent
baselines must abstain.
"""

import numpy as np

from bankmodal import baselines, cmmd, evalx, panel
from bankmodal.rng import stream


def main():
    data = panel.synth_generate(n_firms=2000, latent_k=8, xo_dim=16,
                                xm_dim=50, saturation=8.0, xo_noise=0.8,
                                seed=0)
    perm = stream(0, "acc5/split").permutation(2000)
    tr, te = np.sort(perm[:1400]), np.sort(perm[1400:])
    y = data.y.ravel()
    print("train %d rows (%.1f%% positive), test %d rows"
          % (tr.size, 100.0 * y[tr].mean(), te.size))

    cfg = cmmd.CmmdConfig(
        xo_dim=16, xm_dim=50, latent_dim=8,
        encoder_layers=(64, 64), prior_layers=(64, 64),
        decoder_layers=(64, 64), classifier_layers=(48,),
        hidden_activation="tanh", omega=0.75, lr=1e-3,
        epochs=800, batch_size=128, predict_samples=100, seed=0,
    )
    model = cmmd.CmmdModel.new(cfg)
    history = cmmd.train(model, data.xo[tr], data.xm[tr], data.y[tr])
    print("\nobjective by epoch (lower is better):")
    for i in (0, 9, 99, 399, 799):
        b = history.epochs[i]
        print("  epoch %3d  total %9.3f  recon %9.3f  class %7.4f  "
              "kl_post %6.4f  kl_aux %6.4f"
              % (i + 1, b.total, b.recon_xm, b.class_ll,
                 b.kl_post_prior, b.kl_aux_prior))

    scores = cmmd.predict(model, data.xo[te])
    lr_model = baselines.fit("lr", data.xo[tr], y[tr], penalty="l2", c=1.0)
    lr_scores = baselines.predict(lr_model, data.xo[te])
    print("\ntest AUC, scoring from fundamentals alone:")
    print("  latent-variable model  %.4f" % evalx.auc(scores, y[te]))
    print("  logistic regression    %.4f" % evalx.auc(lr_scores, y[te]))
    print("  latent-state oracle    %.4f  (upper bound, reads the hidden state)"
          % evalx.auc(data.bayes[te], y[te]))

    # the posterior latents double as an uncertainty readout per firm
    prior = cmmd.encode_prior(model, data.xo[te])
    spread = np.sqrt(np.exp(prior.log_var).sum(axis=1))
    print("\nlatent spread per firm: min %.3f  median %.3f  max %.3f"
          % (spread.min(), np.median(spread), spread.max()))

    # and the decoder can sketch the unseen text view from fundamentals
    xm_hat = cmmd.generate_xm(model, data.xo[te])
    print("generated text view: shape %s, %.1f%% of mass on the true "
          "nonzero entries"
          % (xm_hat.shape,
             100.0 * np.abs(xm_hat[data.xm[te] > 0]).sum()
             / max(np.abs(xm_hat).sum(), 1e-12)))


if __name__ == "__main__":
    main()
