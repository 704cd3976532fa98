"""Coefficient tables for the narrow variable-coefficient second-derivative
closures.

Each order is stored per grid coefficient: the stiffness matrix is
``A(c) = sum_m c_m M^(m) / h`` where ``M^(m)`` is the contribution of the
coefficient value at grid point ``m``.  Interior points share one stencil
block; the first ``K`` points have their own boundary blocks which are
mirrored at the right end.
"""
from fractions import Fraction
import numpy as np

def _frac(rows):
    return np.array([[float(Fraction(v)) for v in r] for r in rows])

# second order: the coefficient at m weights the two edges that touch m
M0_2 = np.array([[0.5, -0.5, 0.0], [-0.5, 1.0, -0.5], [0.0, -0.5, 0.5]])
BOUNDARY_2 = np.array([[[0.5, -0.5], [-0.5, 0.5]]])

# fourth order, exact rationals
M0_4 = np.array([
    [1, -4, 3, 0, 0],
    [-4, 20, -12, -4, 0],
    [3, -12, 18, -12, 3],
    [0, -4, -12, 20, -4],
    [0, 0, 3, -4, 1],
]) / 24.0
_BOUNDARY_4_RAT = [
    [
        ['12/17', '-59/68', '2/17', '3/68', '0', '0', '0'],
        ['-59/68', '3481/3264', '-59/408', '-59/1088', '0', '0', '0'],
        ['2/17', '-59/408', '1/51', '1/136', '0', '0', '0'],
        ['3/68', '-59/1088', '1/136', '3/1088', '0', '0', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
    ],
    [
        ['59/192', '0', '-59/192', '0', '0', '0', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
        ['-59/192', '0', '59/192', '0', '0', '0', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
    ],
    [
        ['27010400129/345067064608', '-6025413881/21126554976', '2083938599/8024815456', '-1244724001/21126554976', '49579087/10149031312', '1/784', '0'],
        ['-6025413881/21126554976', '9258282831623875/7669235228057664', '-29294615794607/29725717938208', '260297319232891/2556411742685888', '-1328188692663/37594290333616', '-8673/2904112', '0'],
        ['2083938599/8024815456', '-29294615794607/29725717938208', '378288882302546512209/270764341349677687456', '-4836340090442187227/5525802884687299744', '1613976761032884305/7963657098519931984', '33235054191/26452850508784', '0'],
        ['-1244724001/21126554976', '260297319232891/2556411742685888', '-4836340090442187227/5525802884687299744', '507284006600757858213/475219048083107777984', '-4959271814984644613/20965546238960637264', '752806667/539854092016', '0'],
        ['49579087/10149031312', '-1328188692663/37594290333616', '1613976761032884305/7963657098519931984', '-4959271814984644613/20965546238960637264', '8386761355510099813/128413970713633903242', '-13091810925/13226425254392', '0'],
        ['1/784', '-8673/2904112', '33235054191/26452850508784', '752806667/539854092016', '-13091810925/13226425254392', '660204843/13226425254392', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
    ],
    [
        ['69462376031/2070402387648', '-537416663/7042184992', '213318005/16049630912', '752806667/21126554976', '-49579087/10149031312', '-1/784', '0'],
        ['-537416663/7042184992', '236024329996203/1278205871342944', '-2944673881023/29725717938208', '-60834186813841/1278205871342944', '1328188692663/37594290333616', '8673/2904112', '0'],
        ['213318005/16049630912', '-2944673881023/29725717938208', '13777050223300597/26218083221499456', '-17220493277981/89177153814624', '-10532412077335/42840005263888', '-960119/1280713392', '0'],
        ['752806667/21126554976', '-60834186813841/1278205871342944', '-17220493277981/89177153814624', '1950062198436997/3834617614028832', '-15998714909649/37594290333616', '1063649/8712336', '0'],
        ['-49579087/10149031312', '1328188692663/37594290333616', '-10532412077335/42840005263888', '-15998714909649/37594290333616', '2224717261773437/2763180339520776', '-35039615/213452232', '0'],
        ['-1/784', '8673/2904112', '-960119/1280713392', '1063649/8712336', '-35039615/213452232', '3290636/80044587', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
    ],
    [
        ['0', '0', '0', '0', '0', '0', '0'],
        ['0', '0', '0', '0', '0', '0', '0'],
        ['0', '0', '564461/13384296', '-125059/743572', '564461/4461432', '-3391/6692148', '0'],
        ['0', '0', '-125059/743572', '1869103/2230716', '-375177/743572', '-368395/2230716', '0'],
        ['0', '0', '564461/4461432', '-375177/743572', '280535/371786', '-1118749/2230716', '1/8'],
        ['0', '0', '-3391/6692148', '-368395/2230716', '-1118749/2230716', '5580181/6692148', '-1/6'],
        ['0', '0', '0', '0', '1/8', '-1/6', '1/24'],
    ],
]
BOUNDARY_4 = np.array([_frac(b) for b in _BOUNDARY_4_RAT])

# sixth order interior block (unique narrow stencil whose per-coefficient
# remainder annihilates cubics)
M0_6 = _frac([
    ['1/180', '-1/40', '1/20', '-11/360', '0', '0', '0'],
    ['-1/40', '1/8', '-3/10', '7/40', '1/40', '0', '0'],
    ['1/20', '-3/10', '19/20', '-17/40', '-3/10', '1/40', '0'],
    ['-11/360', '7/40', '-17/40', '101/180', '-17/40', '7/40', '-11/360'],
    ['0', '1/40', '-3/10', '-17/40', '19/20', '-3/10', '1/20'],
    ['0', '0', '1/40', '7/40', '-3/10', '1/8', '-1/40'],
    ['0', '0', '0', '-11/360', '1/20', '-1/40', '1/180'],
])

# sixth order boundary blocks, full double precision
BOUNDARY_6 = np.array([
    [
        [0.8066508902659859, -1.0793846862318588, 0.16769650893423205, 0.15670968792858841, -0.032224609062370166, -0.019447791834577358, 0.0, 0.0, 0.0],
        [-1.0793846862318588, 1.5698364374648361, -0.5179777552973834, 0.03776300492323709, -0.04645917343181425, 0.03622217257298324, 0.0, 0.0, 0.0],
        [0.16769650893423205, -0.5179777552973834, 0.7451809759190181, -0.6034426302099949, 0.24948166587132636, -0.040938765217198164, 0.0, 0.0, 0.0],
        [0.15670968792858841, 0.03776300492323709, -0.6034426302099949, 0.6570161574803931, -0.2960019557387551, 0.047955735616531395, 0.0, 0.0, 0.0],
        [-0.032224609062370166, -0.04645917343181425, 0.24948166587132636, -0.2960019557387551, 0.15750574416055818, -0.03230167179894502, 0.0, 0.0, 0.0],
        [-0.019447791834577358, 0.03622217257298324, -0.040938765217198164, 0.047955735616531395, -0.03230167179894502, 0.008510320661205903, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ],
    [
        [0.31119190574341493, -0.057824102766641246, -0.09669816633199742, -0.22632555411725858, 0.06052660035744287, 0.009129317115039393, 0.0, 0.0, 0.0],
        [-0.057824102766641246, 0.24237797482753282, -0.391270871643716, 0.29778579363236524, -0.10215035781050702, 0.011081563760966195, 0.0, 0.0, 0.0],
        [-0.09669816633199742, -0.391270871643716, 0.8013208639422671, -0.4872645449908379, 0.21973828886220897, -0.04582556983792485, 0.0, 0.0, 0.0],
        [-0.22632555411725858, 0.29778579363236524, -0.4872645449908379, 0.6788376780311682, -0.3152533354100592, 0.052219962854622236, 0.0, 0.0, 0.0],
        [0.06052660035744287, -0.10215035781050702, 0.21973828886220897, -0.3152533354100592, 0.17335320165629212, -0.036214397655377754, 0.0, 0.0, 0.0],
        [0.009129317115039393, 0.011081563760966195, -0.04582556983792485, 0.052219962854622236, -0.036214397655377754, 0.00960912376267478, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ],
    [
        [0.01669905877610535, -0.08213516292079981, 0.07958015999044449, -0.024697231932634706, 0.010988485006589818, -0.0004353089197051401, 0.0, 0.0, 0.0],
        [-0.08213516292079981, 0.4783993064179804, -0.36000762933014063, 0.029484997509330785, -0.08246599056864473, 0.016724478892274026, 0.0, 0.0, 0.0],
        [0.07958015999044449, -0.36000762933014063, 0.6442289174161133, -0.5684425761719436, 0.2463281174638865, -0.0416869893683601, 0.0, 0.0, 0.0],
        [-0.024697231932634706, 0.029484997509330785, -0.5684425761719436, 0.8242879189757796, -0.3181427973340438, 0.05750968895351179, 0.0, 0.0, 0.0],
        [0.010988485006589818, -0.08246599056864473, 0.2463281174638865, -0.3181427973340438, 0.18659496420271623, -0.04330277877050401, 0.0, 0.0, 0.0],
        [-0.0004353089197051401, 0.016724478892274026, -0.0416869893683601, 0.05750968895351179, -0.04330277877050401, 0.011190909212783436, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ],
    [
        [0.032290799801874215, -0.10457116909463016, 0.045992993669492256, -0.044964980970368024, 0.06452935499249851, 0.00867237698210735, -0.0019493753809741395, 0.0, 0.0],
        [-0.10457116909463016, 0.36811263189007176, -0.2943099500102627, 0.24727324872422973, -0.1888783026497053, -0.040103275337736305, 0.012476816478032983, 0.0, 0.0],
        [0.045992993669492256, -0.2943099500102627, 0.8165968821666294, -0.5456729964927702, -0.05825556465081076, 0.0631752356719397, -0.02752660035421766, 0.0, 0.0],
        [-0.044964980970368024, 0.24727324872422973, -0.5456729964927702, 0.6092591181361441, -0.3519971481385876, 0.09233257004088365, -0.006229811299531528, 0.0, 0.0],
        [0.06452935499249851, -0.1888783026497053, -0.05825556465081076, -0.3519971481385876, 0.712892079308951, -0.22494525415386218, 0.04665483529151632, 0.0, 0.0],
        [0.00867237698210735, -0.040103275337736305, 0.0631752356719397, 0.09233257004088365, -0.22494525415386218, 0.13273667883522192, -0.031868332038554124, 0.0, 0.0],
        [-0.0019493753809741395, 0.012476816478032983, -0.02752660035421766, -0.006229811299531528, 0.04665483529151632, -0.031868332038554124, 0.008442467303728149, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ],
    [
        [0.02020792577980122, -0.08028042578689545, 0.11036850738428591, -0.029460638854678974, -0.026987738952125043, 0.016414193424398673, -0.012625168490290986, 0.0023633454955046505, 0.0],
        [-0.08028042578689545, 0.34535877517361646, -0.5424294922091807, 0.27157824175113765, 0.06445091288160765, -0.13325237305925752, 0.09270386301362639, -0.01812950176465449, 0.0],
        [0.11036850738428591, -0.5424294922091807, 1.0217681604023419, -0.8266808280748366, 0.04838478875435684, 0.3800222645185986, -0.23969116813220548, 0.04825776735663952, 0.0],
        [-0.029460638854678974, 0.27157824175113765, -0.8266808280748366, 1.3399202107269255, -0.31009970387942354, -0.6839386276724715, 0.29404486777412353, -0.05536352177077604, 0.0],
        [-0.026987738952125043, 0.06445091288160765, 0.04838478875435684, -0.31009970387942354, 0.4121035336663456, -0.2595814404955541, 0.08353584711321058, -0.011806199088417974, 0.0],
        [0.016414193424398673, -0.13325237305925752, 0.3800222645185986, -0.6839386276724715, -0.2595814404955541, 0.9830627981338214, -0.36839447357060395, 0.06566765872106832, 0.0],
        [-0.012625168490290986, 0.09270386301362639, -0.23969116813220548, 0.29404486777412353, 0.08353584711321058, -0.36839447357060395, 0.19061077671638832, -0.04018454442424844, 0.0],
        [0.0023633454955046505, -0.01812950176465449, 0.04825776735663952, -0.05536352177077604, -0.011806199088417974, 0.06566765872106832, -0.04018454442424844, 0.00919499547488445, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ],
    [
        [0.03119128720115296, -0.13217013676263112, 0.1959302146560913, -0.08320103465025751, -0.055553208342419856, 0.03604899285840832, 0.04933814126954665, -0.05696911760227437, 0.01538486137238361],
        [-0.13217013676263112, 0.6066353497015184, -1.002964825720829, 0.5617187474603736, 0.1922351613113455, -0.19553089473678342, -0.22991603472512068, 0.27687131246958185, -0.07687867899745521],
        [0.1959302146560913, -1.002964825720829, 1.8863027983448877, -1.355102043503734, -0.11409254399627941, 0.39215368660891226, 0.3123454887767863, -0.4451533731507854, 0.1305805979849503],
        [-0.08320103465025751, 0.5617187474603736, -1.355102043503734, 1.3910508421414485, -0.4140964652860508, -0.270428209887684, 0.08526415470557569, 0.14201456814884095, -0.057220559128512344],
        [-0.055553208342419856, 0.1922351613113455, -0.11409254399627941, -0.4140964652860508, 1.0719347520009805, -0.19651045660873123, -0.7179947051473089, 0.29287017135603155, -0.0587927052875672],
        [0.03604899285840832, -0.19553089473678342, 0.39215368660891226, -0.270428209887684, -0.19651045660873123, 0.47208790885006885, -0.3184471977176463, 0.08621574539517476, -0.0055895747617192406],
        [0.04933814126954665, -0.22991603472512068, 0.3123454887767863, 0.08526415470557569, -0.7179947051473089, -0.3184471977176463, 1.2972547190094619, -0.602875617545876, 0.12503105137458131],
        [-0.05696911760227437, 0.27687131246958185, -0.4451533731507854, 0.14201456814884095, 0.29287017135603155, 0.08621574539517476, -0.602875617545876, 0.40412446517373196, -0.09709815424442525],
        [0.01538486137238361, -0.07687867899745521, 0.1305805979849503, -0.057220559128512344, -0.0587927052875672, -0.0055895747617192406, 0.12503105137458131, -0.09709815424442525, 0.024583161687764005],
    ],
])
