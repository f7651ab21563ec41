import chalk from 'chalk';
import { parse } from '@babel/core/lib/parse';
const debug = require('debug');
const ms = require("ms");
const t = require('tiny-lib');
import fs from 'node:fs';
import local from './local';
