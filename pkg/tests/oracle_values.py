"""Reference values frozen from tools/generate_oracles.py.

That script uses only mpmath (tanh-sinh quadrature of the closed-form
density, bracketing root finders and the dense symmetric eigensolver at
80 digits) and shares no code with the package.
"""

# free boundary alpha(beta, q)
ALPHA = {
    (0.0, 0.75): -0.38871347150950411027,
    (0.3, 0.2): 0.58272906191516706861,
    (-0.5, 0.9): -0.81283442839025496404,
    (0.7071067811865476, 0.1): 0.85898202688967239313,
}

# (theta, q) -> (alpha, F1, F2, J) with F1, F2 interval-side potential constants
RATE = {
    ("pi", 0.75): (-0.38871347150950411027, 0.36529163731481698002,
                   0.98195672292021298299, 0.067321635479459336415),
    ("pi/2", 0.3): (0.66719261001806318536, 0.67089415313650959156,
                    0.75837592740725887663, 0.0019957524288945147244),
    ("3pi/2", 0.6): (-0.5456109263274139157, 0.94394861780197808453,
                     0.60200398476008990328, 0.022817328708449936979),
}

# theta = pi: lambda -> (argmax y, Lambda(lambda))
LAMBDA_PI = {
    1.0: (0.85402910332515528233, 0.70330794205998297763),
    0.5: (0.71356249110551815528, 0.30977813589794786623),
}

EIGS_16_PI = [
    "0.9999999999818935880824127", "0.9999999970607284635132014",
    "0.9999997876511512714427876", "0.9999910301796131514238244",
    "0.9997560090720415219224166", "0.9956117570540673558931782",
    "0.9506418940320493900816392", "0.7147039597676136503789902",
    "0.2852960402323863496210098", "0.04935810596795060991836076",
    "0.004388242945932644106821757", "0.0002439909279584780775833832",
    "0.000008969820386848576175564566", "0.0000002123488487285572124369775",
    "2.939271536486798623132792e-9", "1.810641191758725516437372e-11",
]

EIGS_12_HALF_PI = [
    "0.9990871611682855589729283", "0.9712476050361321950982232",
    "0.7376967515091654063852323", "0.2586357685933527077751991",
    "0.03156860825691582597504528", "0.001709582611455050805823967",
    "0.00005345558555151350723097899", "0.000001053875048436411967448089",
    "1.326037586116591044640008e-8", "1.032631121587708795729614e-10",
    "4.534732001521800230608958e-13", "8.585435159329802954046593e-16",
]

# n = 16, theta = pi
LOG_MGF_16_PI = {0.5: 0.30691943973175643184, 1.0: 0.69951646774232014743}
SUM_P_1MP_16_PI = 0.51089239143118104581
