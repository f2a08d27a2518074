"""Market uncertainty index from posterior latent variances.

Each firm-quarter carries the mean and variance of its latent state
posterior. Collapsing variances to a per-company spread, averaging within
firm-years, and taking a log of the cross-section sum yields a yearly
index that decomposes exactly across industry divisions.
"""

import math

import numpy as np

from bankmodal import mui
from bankmodal.rng import stream


def main():
    rng = stream(0, "demo/mui")
    latents = []
    sic_map = {}
    for i in range(12):
        firm = "F%02d" % i
        sic_map[firm] = (i % 3) + 4
        for year in (2009, 2010):
            scale = 1.0 if year == 2009 else 2.5  # uncertainty doubles-ish
            for quarter in (1, 2, 3, 4):
                latents.append(mui.CompanyLatent(
                    firm_id=firm, quarter=(year, quarter),
                    mu=rng.standard_normal(6),
                    var=scale * rng.uniform(0.2, 1.5, 6)))

    series = mui.mui_series(latents)
    print("yearly index:")
    for year in sorted(series):
        print("  %d  %.4f" % (year, series[year]))
    print("a c-fold variance scaling shifts the index by ln(c)/2 = %.4f"
          % (0.5 * math.log(2.5)))

    by_div = mui.mui_by_division(latents, sic_map)
    print("\nper-division index, 2010:")
    for division in sorted(by_div):
        print("  division %2d  %.4f" % (division, by_div[division][2010]))
    total = sum(math.exp(v[2010]) for v in by_div.values())
    print("exp-sum of divisions %.6f vs exp(overall) %.6f"
          % (total, math.exp(series[2010])))

    # hand identity: four unit variances give exp(index) = 2
    unit = [mui.CompanyLatent("U", (2010, 1), np.zeros(4), np.ones(4))]
    print("\nsingle firm, four unit variances: index %.12f (ln 2 = %.12f)"
          % (mui.mui(unit), math.log(2.0)))

    print("\nSIC code 3571 falls in division %d"
          % mui.division_of_sic(3571))
    table = mui.mui_table(latents, sic_map)
    print("mui_table rows (year, division, value): %d" % len(table))


if __name__ == "__main__":
    main()
