#!/usr/bin/env python3
"""Low eigenvalues of the fiber pencil over a quasimomentum sweep: the
first pair scales like chi^4, the next like chi^2, the fifth stays gapped."""

from rodhom import fem, fiber, pipeline as pl
from rodhom.geometry import ProductMesh, build_rectangle
from rodhom.material import MaterialProfile, make_isotropic

profile = MaterialProfile([(-0.5, 0.0, make_isotropic(1.0, 1.0)),
                           (0.0, 0.5, make_isotropic(5.0, 5.0))])
forms = fem.assemble(profile, ProductMesh(build_rectangle(1.0, 4, 4), 8))

print("%8s %12s %12s %12s %12s %12s" % ("chi", "l12/chi^4", "l34/chi^2",
                                        "lambda5", "bendQ", "stretchQ"))
for row in fiber.spectrum_scaling(forms, pl.CHI_SWEEP, k=5):
    chi = row["chi"]
    rb = fiber.rayleigh_bounds(forms, chi)
    print("%8.4f %12.5f %12.5f %12.5f %12.5f %12.5f"
          % (chi, row["ratio_bend"][0], row["ratio_stretch"][0],
             row["lambda5"], rb["bend_quotient"], rb["stretch_quotient"]))

vals, _ = fem.smallest_eigs(forms, 0.0, 5)
print("chi = 0 eigenvalues:", vals)
