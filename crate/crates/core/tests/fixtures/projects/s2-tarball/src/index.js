const m0 = require('widget');
const m1 = require('ssh-dep');
const path = require('path');
module.exports = {};
