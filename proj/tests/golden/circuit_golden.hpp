#pragma once
// Frozen reference values, generated by tests/oracles/circuit_oracle.py
// (50-digit mpmath evaluation plus a 10^6-point dense slip sweep for the
// breakdown point). Regenerate with:
//   python3 tests/oracles/circuit_oracle.py
// Field order per row: rs, xs, xm, rr1, xr1, rr2, xr2, rc, slip, then
// zin_re, zin_im, is_re, is_im, i_mag, p_in, q_in, p_airgap,
// rotor_cu1, rotor_cu2, torque, p_mech, core_loss, efficiency.

namespace cagefit::golden {

struct OperatingCase {
  double rs, xs, xm, rr1, xr1, rr2, xr2, rc, slip;
  double zin_re, zin_im, is_re, is_im, i_mag, p_in, q_in, p_airgap;
  double rotor_cu1, rotor_cu2, torque, p_mech, core_loss, efficiency;
};

inline constexpr OperatingCase kOperatingCases[] = {
    {0.031, 0.1, 3.1, 0.018, 0.18, 0.12, 0.09, 42.0, 0.02, 0.7024137512397982, 0.3873557921296926, 1.0916715126982748, -0.6020173762263054, 1.2466641941258056, 1.0916715126982748, 0.6020173762263054, 1.0237553316022656, 0.017712567649927586, 0.0027625389821177267, 1.0237553316022656, 1.0032802249702202, 0.019736861095633596, 0.9190312408999493},  // golden operating point
    {0.02, 0.08, 1000000000.0, 0.02, 0.12, 0.1, 0.04, 1000000000.0, 1.0, 0.06279999999638256, 0.12959999999512592, 3.027965284550807, -6.24879460008966, 6.9437747456664045, 3.027965284550807, 6.24879460008966, 2.0636451299727727, 0.2796528447159365, 1.7839922852568364, 2.0636451299727727, 0.0, 2.06943105089793e-10, 0.0},  // parallel combination, shunt legs open
    {0.05721086463165097, 0.1357259746389046, 2.1466100829202013, 0.07077742294141504, 0.1831731089721827, 0.2376166043886854, 0.11557128047065623, 75.25228411084407, 1.0, 0.1274269148807762, 0.22758958559407683, 1.8729711574349117, -3.345201678539402, 3.833848618123296, 1.8729711574349117, 3.345201678539402, 1.0294519612486124, 0.36067245694823896, 0.6687795043003734, 1.0294519612486124, 0.0, 0.002611296569867362, 0.0},  // random feasible set 0
    {0.02996674768488855, 0.05623277665822163, 1.6263615224583148, 0.032955149730389044, 0.25432586388463657, 0.06409551482832695, 0.18922817437250605, 77.94279755282103, 0.03471600522478646, 0.5061152237377786, 0.3463071950697424, 1.3457601669704098, -0.9208306859814442, 1.6306439155282437, 1.3457601669704098, 0.9208306859814442, 1.2554736657965468, 0.02820428227450603, 0.0153807480668687, 1.2554736657965468, 1.2118886354551721, 0.010604931688274852, 0.9005234849411462},  // random feasible set 1
    {0.0238993968483129, 0.10346058088150964, 3.7715330671384066, 0.038777133060000656, 0.1117906545430796, 0.12316257422503724, 0.04337061007156063, 61.73635785106222, 0.0591494053146699, 0.4957387858669838, 0.2293557183680753, 1.661540226584904, -0.7687188558372904, 1.8307497381891407, 1.661540226584904, 0.7687188558372904, 1.5684908406147875, 0.07007941196994966, 0.022695888493921727, 1.5684908406147875, 1.4757155401509163, 0.012947101487491121, 0.8881611871558909},  // random feasible set 2
    {0.03097038599984244, 0.10619152524913789, 2.3937569321164993, 0.03797536770208609, 0.19604975199376456, 0.05973681234448669, 0.06735840676829812, 56.14913533948493, 0.35160379360449884, 0.10903713269535016, 0.17444561831551694, 2.576469264122903, -4.122024880337041, 4.860996089598058, 2.576469264122903, 4.122024880337041, 1.840136040076375, 0.19259224189176144, 0.45440657054745215, 1.840136040076375, 1.1931372276371615, 0.004525209160796362, 0.4630900295421674},  // random feasible set 3
    {0.016877641659108256, 0.12976716942700933, 1.7034685423932157, 0.07488157245062053, 0.0995005760770997, 0.12389477516037517, 0.0327102441547905, 78.95531392952586, 1.0, 0.06973368726972995, 0.16815170980993763, 2.1043557377641555, -5.074319589392994, 5.493362573720981, 2.1043557377641555, 5.074319589392994, 1.5934076835156656, 0.6217886908476234, 0.9716189926680422, 1.5934076835156656, 0.0, 0.0016309156337812962, 0.0},  // random feasible set 4
    {0.011983543252476183, 0.09687548718931807, 4.3997512027732775, 0.024594972085714283, 0.20178565380272367, 0.053178414334195866, 0.0693843687737703, 61.94942336984964, 0.014067225618614277, 1.0650535787533568, 0.4673511153361489, 0.7873211641073427, -0.3454806701875157, 0.8597857343109132, 0.7873211641073427, 0.3454806701875157, 0.7635917635205486, 0.007314677706570411, 0.0034269399113887045, 0.7635917635205486, 0.7528501459025895, 0.014870787826003486, 0.95621733572495},  // random feasible set 5
    {0.05521140706236735, 0.09991225823800653, 3.608468414959341, 0.06272305763770836, 0.10741458751339951, 0.18669854599571842, 0.0675454378179554, 42.23953634902368, 0.1350488965998498, 0.38743074691299717, 0.1934236963085565, 2.0661286111626396, -1.0315088211356807, 2.309306797709126, 2.0661286111626396, 1.0315088211356807, 1.7566532216040622, 0.1753281868825141, 0.061905892403685964, 1.7566532216040622, 1.5194191423178622, 0.015038593555597548, 0.735394270283525},  // random feasible set 6
    {0.03625160828140007, 0.13198828417896186, 1.5743474788671326, 0.015615401964346584, 0.27334786204909844, 0.02587340853123789, 0.16025026150689653, 37.39068146160842, 0.47272737675168053, 0.05944433703661617, 0.2281308785900001, 1.0695789141964025, -4.10474722372063, 4.241809616700846, 1.0695789141964025, 4.10474722372063, 0.41259867484844115, 0.036251374121483666, 0.1587953150908395, 0.41259867484844115, 0.21755198563611797, 0.004706906740862822, 0.2033996582660471},  // random feasible set 7
    {0.027021632885817305, 0.10345447954537959, 4.094221970649498, 0.013511397623838094, 0.24126362005622498, 0.03736484573603798, 0.12956799988553083, 67.91086424288059, 1.0, 0.04374611766847847, 0.18705370563980248, 1.1854413191370663, -5.068819894911518, 5.205593745978286, 1.1854413191370663, 5.068819894911518, 0.45030320138036795, 0.04557685143106432, 0.4047263499493036, 0.45030320138036795, 0.0, 0.0029003366545354635, 0.0},  // random feasible set 8
    {0.059439242806860824, 0.05903893674167951, 3.898909491879844, 0.05438283522703325, 0.19013814016553077, 0.12613424747305665, 0.13903584207881414, 33.70937621439987, 0.031004950737218543, 1.0953074351530183, 0.46163051901658253, 0.7752736210481596, -0.32674841106536334, 0.8413166536012853, 0.7752736210481596, 0.32674841106536334, 0.7072675972251015, 0.01527385594566174, 0.006654941064333456, 0.7072675972251015, 0.6853388002151062, 0.025934112755643553, 0.8839960261881957},  // random feasible set 9
    {0.02850128976593993, 0.14937806228729927, 3.470165412536189, 0.036161930016667454, 0.27381353450806717, 0.08029004758263321, 0.10895844660978128, 51.227299808599255, 0.09798839304185582, 0.2789970680606659, 0.2966759622787334, 1.68216455181532, -1.788756385828642, 2.4554687917436016, 1.68216455181532, 1.788756385828642, 1.500382010591715, 0.08719030340239342, 0.059829718764397424, 1.500382010591715, 1.3533619884249242, 0.009938945667052973, 0.8045360288709174},  // random feasible set 10
    {0.034899229534689005, 0.12176476644714558, 3.459493686061627, 0.03840238282459724, 0.09528565290994521, 0.06464089284667501, 0.045210587613849385, 77.69464226782233, 0.8539218804321871, 0.06887629998590222, 0.15792452890923905, 2.3203094058306437, -5.320172104402869, 5.804142224244045, 2.3203094058306437, 5.320172104402869, 1.1435543248161049, 0.28689497474015085, 0.6896110846831776, 1.1435543248161049, 0.16704826539277653, 0.0010674996236094442, 0.07199396122474243},  // random feasible set 11
    {0.05961479109235195, 0.11303612182313219, 3.7443609281611696, 0.01912257167647232, 0.167165273875102, 0.028803203571252427, 0.11658279434463469, 18.870445896046128, 1.0, 0.07255361868615301, 0.18070791032450165, 1.9133652897536522, -4.765582330145114, 5.135342410923093, 1.9133652897536522, 4.765582330145114, 0.33458557437736974, 0.08455813399312267, 0.25002744038424707, 0.33458557437736974, 0.0, 0.006633844535095528, 0.0},  // random feasible set 12
    {0.0515463027668215, 0.11008750047800363, 2.714058067108697, 0.03595113880175467, 0.09210551065862843, 0.10081298390094456, 0.0382910807567151, 75.02352648780001, 0.04527489854360524, 0.5881108507780289, 0.27383637578496195, 1.3974001467869999, -0.6506579349986403, 1.541454805895075, 1.3974001467869999, 0.6506579349986403, 1.2649544581597165, 0.042070480804038704, 0.015200203951423597, 1.2649544581597165, 1.207683773404254, 0.00996739910517734, 0.8642361861640313},  // random feasible set 13
    {0.011821542507523599, 0.06343950045795227, 3.458489970938502, 0.04976308787918233, 0.2287485689244631, 0.12709434926962854, 0.13936101468106682, 73.78221844649457, 0.13731714130475225, 0.2627043630460602, 0.20306970989190687, 2.3827867909525025, -1.8418872711609844, 3.0116808613800004, 2.3827867909525025, 1.8418872711609844, 2.265428386931365, 0.20260541442058808, 0.10847673550346312, 2.265428386931365, 1.954346237007314, 0.010134393696375355, 0.8201934996567938},  // random feasible set 14
    {0.02724388124823389, 0.08951410529528255, 2.958142875513735, 0.05898406314190935, 0.16344057546294471, 0.1988470487718546, 0.09224814084979305, 45.9373401552872, 0.39890651060308063, 0.14770931710221555, 0.1872652844493548, 2.5965696748334928, -3.2919207013446363, 4.192721786644837, 2.5965696748334928, 3.2919207013446363, 2.1084419357329485, 0.5137178162365102, 0.32735339915592504, 2.1084419357329485, 1.2673707203405133, 0.009209839663123363, 0.48809424704607035},  // random feasible set 15
    {0.038718010566434924, 0.061734197153139395, 2.0622600599295557, 0.07260053087219848, 0.2920401320647597, 0.15477483833726607, 0.14052522048994853, 52.15964905007349, 1.0, 0.10383826121717211, 0.16511168329804513, 2.729407322233453, -4.339990212638966, 5.126907389105406, 2.729407322233453, 4.339990212638966, 1.7041749231186907, 0.31456556537957736, 1.3896093577391133, 1.7041749231186907, 0.0, 0.007522546276207144, 0.0},  // random feasible set 16
    {0.047604798804545864, 0.09965489000238628, 2.2737757395440386, 0.02114205929142633, 0.22355432483003507, 0.07656040172821021, 0.04861595167335365, 30.89859788470565, 0.03673267621901481, 0.43916722596533503, 0.3005825756616332, 1.550634612010054, -1.0613126800697321, 1.8790562271630853, 1.550634612010054, 1.0613126800697321, 1.3604153555824359, 0.03792526714520549, 0.012046429634780033, 1.3604153555824359, 1.3104436588024504, 0.02213374284712532, 0.8451015143430538},  // random feasible set 17
    {0.031993409501512346, 0.07968480806231742, 1.2568655677459644, 0.024894130963391707, 0.2540171786180832, 0.08058255140498659, 0.173200352813297, 78.9339145433207, 0.14526427860948582, 0.15530546861411823, 0.2218978180366293, 2.117077316476825, -3.024844143178771, 3.6921130067298353, 2.117077316476825, 3.024844143178771, 1.6748340594785776, 0.1280532182648075, 0.11524034317594474, 1.6748340594785776, 1.4315404980378255, 0.0061187461434594635, 0.6761871599569879},  // random feasible set 18
    {0.01869878729756967, 0.1046245816996278, 1.9349351119286808, 0.03212603884200186, 0.09620086958692158, 0.11566486373757842, 0.07629718125707678, 25.976128552851875, 0.8245758984279892, 0.05707821414140929, 0.15676366701141214, 2.0507557997800845, -5.63234158871863, 5.994069662786807, 2.0507557997800845, 5.63234158871863, 1.3731320583184428, 0.4491054867216501, 0.6831461139265539, 1.3731320583184428, 0.24088045767023877, 0.00579742250319122, 0.11745935703123205},  // random feasible set 19
};

// Breakdown point of the golden parameter set (case 0 above).
inline constexpr double kGoldenBreakdownSlip = 0.07071022806651686;
inline constexpr double kGoldenBreakdownTorque = 1.7724388929483255;

// 400 V / 50 Hz / 4-pole / 1480 rpm / 181 A / 100 kW plate,
// pf 0.85, eff 0.92, ratios tb 2.3, tlr 1.9, ilr 6.5.
inline constexpr double kPlateSBase = 125400.47846798672;        // VA
inline constexpr double kPlatePmFl = 0.7974451231900909;
inline constexpr double kPlateQFl = 0.5371870655263297;
inline constexpr double kPlateSlipFl = 0.013333333333333334;
inline constexpr double kPlateTorqueRated = 0.8082214086386056;
inline constexpr double kPlateTorqueBreakdown = 1.8589092398687928;
inline constexpr double kPlateTorqueLockedRotor = 1.5356206764133506;
inline constexpr double kPlateCurrentLockedRotor = 6.5;
inline constexpr double kPlateConsistency = 0.019750796918274725;

// residuals(golden params, plate targets above)
inline constexpr double kGoldenResiduals[6] = {
    0.09564251786724481, 0.16817301612274638, 0.04651671263228035,
    0.1969699728244501, 0.19265331858859017, -0.009447845393655287};
inline constexpr double kGoldenSquaredError = 0.11559519227016575;

// All eight parameters at 1e9: the five power-family residuals saturate at
// 1, but efficiency is scale-invariant (eta of the all-equal machine stays
// ~0.0085), so the error sits just below the 6.0 ceiling. The ceiling is
// reached exactly once the squared rotor currents underflow (around 1e160
// per parameter): rotor power becomes 0 while p_in stays positive, so the
// efficiency is exactly 0 and all six residuals round to exactly 1.
inline constexpr double kDegenerateResiduals[6] = {
    0.9999999999964, 0.9999999993793633, 0.9999999999757193,
    0.999999999973952, 0.9999999999129715, 0.9907204911618949};
inline constexpr double kDegenerateSquaredError = 5.981527090084878;

}  // namespace cagefit::golden
