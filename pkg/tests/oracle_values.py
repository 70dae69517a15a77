"""Reference values computed once with mpmath at 40 significant digits."""

# x -> Phi(x)
PHI_CDF = {
    -8.0: 6.220960574271784e-16,
    -6.0: 9.865876450376981e-10,
    -5.0: 2.866515718791939e-07,
    -4.0: 3.167124183311992e-05,
    -3.0: 0.001349898031630094526651815,
    -2.5: 0.006209665325776135166978105,
    -2.0: 0.02275013194817920720028264,
    -1.5: 0.06680720126885806600449404,
    -1.0: 0.1586552539314570514147675,
    -0.75: 0.2266273523768681993270622,
    -0.5: 0.3085375387259868963622954,
    -0.25: 0.4012936743170762757591462,
    0.0: 0.5,
    0.3: 0.6179114221889526330722736,
    0.75: 0.7733726476231318006729378,
    1.0: 0.8413447460685429485852325,
    1.5: 0.933192798731141933995506,
    2.5: 0.9937903346742238648330219,
    4.0: 0.9999683287581668800787462,
    6.5: 0.9999999999598399941614088,
}

PHI_PDF_1 = 0.2419707245191433498
G_1 = 0.083315470587686298383
G_NEG_075 = 0.88116691787215325544
H_1 = 0.28759997093917836123
ONE_MINUS_PHI1_SQ = 0.29213901826285898466

# expected overflow of N(160, 6400) over capacity 100
ONE_BIN_DEV = 70.493353429772260435
# two bins of capacity 100, each N(80, 3200)
EVEN_SPLIT_DEV = 27.9270929784093084
