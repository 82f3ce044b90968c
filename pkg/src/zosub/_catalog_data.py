"""Fixed catalog coefficients, generated by scripts/generate_catalog_data.py (seed 20251014)."""

FINITEMAX_LINEAR = [[-1.539537090214, -0.056950431892], [0.417684301091, -0.294288814853], [-0.819476738392, -0.102644943376]]
FINITEMAX_QUADRATIC = [[[-0.821816499816, 0.761482858388], [0.761482858388, 1.015687232342]], [[1.010074212225, 0.063132069791], [0.063132069791, 0.674835280899]], [[2.233340762752, 1.675025705555], [1.675025705555, 0.293724422407]]]
NNL1_INPUTS = [[-0.425513067141, -0.978035442204, 0.6459051081], [1.862821564329, 0.412390654509, 0.481180347203], [0.878129389674, 0.218900109862, 0.322170693268], [-2.112323678292, -0.046332146167, -0.38716111699], [-1.11715349086, 0.791688100427, 0.277028322482], [-2.081734035783, 0.96231558205, 1.689378935475], [0.733840970291, -0.308059709768, -2.355762350831], [-0.161133694307, -0.913115244247, 1.039806782749], [0.142049586528, 0.155681720394, -2.339611073907], [0.043527819496, 0.172561179243, -0.986090770544], [-0.842314821952, -1.230982825419, 0.865612088731], [0.433591571158, -0.746742559772, -1.465779425375], [0.028462115616, -1.286106274785, -0.146384549999], [-0.852154444986, -0.423116183482, -0.425491106479], [-1.856772891501, -1.165369725568, 0.249374172165], [0.550199026137, 1.63046724896, -0.125227787632], [0.850365703659, 1.261623266191, -1.11159249437], [0.583932364442, -1.291675202203, -0.705323654221], [0.162820742989, -0.033893139939, -0.220919361477], [1.055317273187, 0.71688384979, -1.074095867133]]
NNL1_TARGETS = [-1.201766003395, 3.48893718932, 2.153088776976, -3.556378226297, -3.370304594523, -3.927789245071, 3.257924585741, -0.52219508494, 1.976585642923, 0.801947824894, -2.1245662208, 2.776842974315, 1.179493024002, -2.004468143473, -3.495267689787, 0.570612963868, 2.223672056016, 2.874396732838, 0.97313854526, 3.066827573577]
