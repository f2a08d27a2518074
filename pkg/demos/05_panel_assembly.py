"""Quarterly panel assembly: predictors, disclosure windows, labels, drops.

Builds a toy three-firm panel and walks through the filtering rules that
decide which firm-quarters survive and how bankruptcy labels are set.
"""

import math

from bankmodal import panel


def raw(firm, quarter, **over):
    base = dict(
        actq=4.0, lctq=2.0, apq=1.0, saleq=10.0, cheq=1.0, atq=20.0, chq=1.0,
        dlcq=1.0, dlttq=2.0, invchy=1.0, saley=10.0, invtq=1.0, ltq=10.0,
        cshoq=5.0, prccq=10.0, niq=1.0, oiadpq=2.0, req=3.0, seqq=10.0,
        wcapq=2.0, ret=0.05, vwretd=0.02,
        daily_returns=tuple(0.01 * math.sin(i) for i in range(30)),
    )
    base.update(over)
    return panel.RawQuarter(firm_id=firm, quarter=quarter, **base)


def main():
    quarters = [panel.add_quarters((2010, 1), k) for k in range(8)]
    raws = []
    for j, firm in enumerate(("ACME", "BETA", "CRUX")):
        for k, q in enumerate(quarters):
            raws.append(raw(firm, q,
                            atq=20.0 + 3.0 * j + k,
                            niq=1.0 + 0.4 * j - 0.2 * k,
                            prccq=10.0 + 2.0 * j - 0.5 * k,
                            saleq=10.0 + j + 0.5 * k))

    # ACME files one disclosure, BETA files every other quarter, CRUX none
    mda_index = {("ACME", (2010, 1)): "ACME_2010Q1",
                 ("BETA", (2010, 1)): "BETA_2010Q1",
                 ("BETA", (2010, 3)): "BETA_2010Q3",
                 ("BETA", (2011, 1)): "BETA_2011Q1"}
    bankruptcies = [("BETA", (2011, 2))]

    rows, report = panel.build_panel(raws, mda_index, bankruptcies)
    print("input rows %d -> emitted %d" % (report["input_rows"],
                                           report["emitted_rows"]))
    print("drops: %s" % report["drops"])
    print("bankruptcies matched: %d of %d" % (report["bankruptcies_matched"],
                                              report["bankruptcies_total"]))

    print("\nfirm-quarter rows (disclosures roll forward four quarters):")
    for row in rows:
        print("  %-4s %s  doc %-12s  labels 1y=%d 2y=%d 3y=%d"
              % (row.firm_id, panel.format_quarter(row.quarter), row.mda_ref,
                 row.labels[1], row.labels[2], row.labels[3]))

    print("\nfirst five of the %d predictors for ACME 2010Q1:" %
          panel.N_PREDICTORS)
    for name, value in list(zip(panel.PREDICTOR_NAMES, rows[0].predictors))[:5]:
        print("  %-22s %.6f" % (name, value))

    x = panel.rows_to_matrix(rows)
    scaler = panel.fit_scaler(x)
    scaled = panel.apply_scaler(x, scaler)
    print("\nmin-max scaling: column ranges now [%.1f, %.1f]"
          % (scaled.min(), scaled.max()))

    y = panel.rows_to_labels(rows, horizon=1)
    print("one-year label prevalence %.3f over %d rows" % (y.mean(), y.size))


if __name__ == "__main__":
    main()
